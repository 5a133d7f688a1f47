################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_tensor_io.py                                                                            #
# Date de modification : 19.10.2026                                                                            #
# Description : Format binaire MDT1 : disposition des octets, lecture à décalage et rejets d'intégrité.        #
################################################################################################################

import struct

import numpy as np
import pytest

from mdgan.errors import ContractError, IntegrityError
from mdgan.tensor_io import decode_array, encode_array, load_tensor, save_tensor


def test_header_layout():
    data = encode_array(np.zeros((2, 3), dtype=np.float32))
    assert data[:4] == b"MDT1"
    assert struct.unpack_from("<I", data, 4) == (2,)
    assert struct.unpack_from("<2I", data, 8) == (2, 3)
    assert data[16] == 0
    assert len(data) == 17 + 6 * 4


def test_values_are_little_endian():
    data = encode_array(np.array([1.0], dtype=np.float64))
    assert data[-8:] == struct.pack("<d", 1.0)
    assert data[12] == 1


def test_consecutive_arrays_decode_by_offset():
    a = np.arange(6, dtype=np.uint8).reshape(1, 2, 3)
    b = np.linspace(-1, 1, 5).astype(np.float32)
    buf = encode_array(a) + encode_array(b)
    first, pos = decode_array(buf)
    second, end = decode_array(buf, pos)
    np.testing.assert_array_equal(first, a)
    np.testing.assert_array_equal(second, b)
    assert end == len(buf)


def test_truncated_and_bad_magic():
    data = encode_array(np.ones(4, dtype=np.float32))
    with pytest.raises(IntegrityError):
        decode_array(data[:-1])
    with pytest.raises(IntegrityError):
        decode_array(b"XXXX" + data[4:])
    with pytest.raises(IntegrityError):
        decode_array(data[:6])


def test_unsupported_dtype():
    with pytest.raises(ContractError):
        encode_array(np.ones(2, dtype=np.int32))


def test_file_with_trailing_bytes(tmp_path):
    path = tmp_path / "t.mdt"
    save_tensor(str(path), np.eye(3))
    np.testing.assert_array_equal(load_tensor(str(path)).values, np.eye(3))
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(IntegrityError):
        load_tensor(str(path))
