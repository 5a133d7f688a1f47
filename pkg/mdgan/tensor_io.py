################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/tensor_io.py                                                                                 #
# Date de modification : 19.10.2026                                                                            #
# Description : Codec binaire MDT1 des tenseurs : magic, rang, extents u32 LE, code de type u8, données brutes #
# LE.                                                                                                          #
################################################################################################################

import struct

import numpy as np

from mdgan.constants import DTYPE_CODES, TENSOR_MAGIC
from mdgan.data_store import atomic_write_bytes
from mdgan.errors import ContractError, IntegrityError
from mdgan.tensor import Tensor

_CODE_DTYPES = {code: np.dtype(name).newbyteorder("<") for name, code in DTYPE_CODES.items()}


#--------------------------------------------------------------------------------------------------------------#
# Sérialise un tableau numpy (float32, float64 ou uint8) au format MDT1.                                       #
#--------------------------------------------------------------------------------------------------------------#
def encode_array(arr: np.ndarray) -> bytes:
    arr = np.asarray(arr)
    code = DTYPE_CODES.get(arr.dtype.name)
    if code is None:
        raise ContractError(f"type {arr.dtype} non sérialisable")
    header = TENSOR_MAGIC + struct.pack("<I", arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape) + struct.pack("<B", code)
    body = np.ascontiguousarray(arr, dtype=_CODE_DTYPES[code]).tobytes()
    return header + body


#--------------------------------------------------------------------------------------------------------------#
# Décode un tableau MDT1 à partir d'un décalage ; renvoie (tableau, décalage suivant).                         #
#--------------------------------------------------------------------------------------------------------------#
def decode_array(buf, offset: int = 0) -> tuple[np.ndarray, int]:
    buf = memoryview(buf)
    end = len(buf)
    if offset + 8 > end:
        raise IntegrityError("tenseur tronqué (en-tête)")
    if bytes(buf[offset:offset + 4]) != TENSOR_MAGIC:
        raise IntegrityError("magic MDT1 absent")
    (rank,) = struct.unpack_from("<I", buf, offset + 4)
    pos = offset + 8
    if pos + 4 * rank + 1 > end:
        raise IntegrityError("tenseur tronqué (extents)")
    shape = struct.unpack_from(f"<{rank}I", buf, pos)
    pos += 4 * rank
    (code,) = struct.unpack_from("<B", buf, pos)
    pos += 1
    dtype = _CODE_DTYPES.get(code)
    if dtype is None:
        raise IntegrityError(f"code de type inconnu : {code}")
    count = int(np.prod(shape)) if rank else 1
    nbytes = count * dtype.itemsize
    if pos + nbytes > end:
        raise IntegrityError("tenseur tronqué (données)")
    arr = np.frombuffer(buf, dtype=dtype, count=count, offset=pos).reshape(shape)
    return arr.astype(dtype.newbyteorder("="), copy=True), pos + nbytes


def save_tensor(path: str, tensor) -> None:
    values = tensor.values if isinstance(tensor, Tensor) else tensor
    atomic_write_bytes(path, encode_array(values))


def load_tensor(path: str) -> Tensor:
    with open(path, "rb") as f:
        data = f.read()
    arr, end = decode_array(data)
    if end != len(data):
        raise IntegrityError(f"{path} : octets superflus après le tenseur")
    return Tensor(arr)
