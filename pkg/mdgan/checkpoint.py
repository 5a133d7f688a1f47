################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/checkpoint.py                                                                                #
# Date de modification : 19.10.2026                                                                            #
# Description : Format de checkpoint MDCK : magic, version u32, CRC32 du contenu puis blocs de tenseurs nommés #
# MDT1.                                                                                                        #
################################################################################################################

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from mdgan.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from mdgan.data_store import atomic_write_bytes
from mdgan.errors import IntegrityError, UnsupportedVersionError
from mdgan.tensor_io import decode_array, encode_array

META_BLOCK = "__meta__"


#--------------------------------------------------------------------------------------------------------------#
# Instantané d'entraînement : étage, itération, configuration, tableaux nommés, états aléatoires et            #
# compléments.                                                                                                 #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class Checkpoint:
    stage: int
    iteration: int
    config: dict
    arrays: dict
    rng_state: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    version: int = CHECKPOINT_VERSION

    def prefixed(self, prefix: str) -> dict:
        return {k: v for k, v in self.arrays.items() if k.startswith(prefix)}

    def meta(self) -> dict:
        return {"stage": self.stage, "iteration": self.iteration, "config": self.config,
                "rng_state": self.rng_state, "extra": self.extra}


def _block(name: str, payload: bytes) -> bytes:
    raw = name.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw + struct.pack("<Q", len(payload)) + payload


#--------------------------------------------------------------------------------------------------------------#
# Sérialise un checkpoint ; les métadonnées JSON (clés triées) forment le premier bloc.                        #
#--------------------------------------------------------------------------------------------------------------#
def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    meta = json.dumps(checkpoint.meta(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    blocks = [_block(META_BLOCK, encode_array(np.frombuffer(meta, dtype=np.uint8)))]
    for name, arr in checkpoint.arrays.items():
        blocks.append(_block(name, encode_array(arr)))
    payload = struct.pack("<I", len(blocks)) + b"".join(blocks)
    header = CHECKPOINT_MAGIC + struct.pack("<II", checkpoint.version, zlib.crc32(payload))
    return header + payload


#--------------------------------------------------------------------------------------------------------------#
# Décode un checkpoint : magic, puis version, puis CRC ; aucun état partiel n'est renvoyé en cas d'erreur.     #
#--------------------------------------------------------------------------------------------------------------#
def decode_checkpoint(data: bytes) -> Checkpoint:
    if len(data) < 12:
        raise IntegrityError("checkpoint tronqué (en-tête)")
    if data[:4] != CHECKPOINT_MAGIC:
        raise IntegrityError("magic MDCK absent : ce fichier n'est pas un checkpoint")
    version, crc = struct.unpack_from("<II", data, 4)
    if version != CHECKPOINT_VERSION:
        raise UnsupportedVersionError(f"version de checkpoint {version} non supportée (attendu {CHECKPOINT_VERSION})")
    payload = memoryview(data)[12:]
    if zlib.crc32(payload) != crc:
        raise IntegrityError("CRC32 invalide : checkpoint corrompu ou tronqué")

    try:
        (count,) = struct.unpack_from("<I", payload, 0)
        pos = 4
        arrays, meta = {}, None
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", payload, pos)
            pos += 4
            name = bytes(payload[pos:pos + name_len]).decode("utf-8")
            pos += name_len
            (size,) = struct.unpack_from("<Q", payload, pos)
            pos += 8
            arr, end = decode_array(payload[pos:pos + size])
            if end != size:
                raise IntegrityError(f"bloc {name} : taille incohérente")
            pos += size
            if name == META_BLOCK:
                meta = json.loads(arr.tobytes().decode("utf-8"))
            else:
                arrays[name] = arr
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"checkpoint illisible : {exc}") from exc
    if meta is None:
        raise IntegrityError("bloc de métadonnées absent")
    if pos != len(payload):
        raise IntegrityError("octets superflus en fin de checkpoint")
    try:
        return Checkpoint(stage=int(meta["stage"]), iteration=int(meta["iteration"]), config=meta["config"],
                          arrays=arrays, rng_state=meta.get("rng_state", {}), extra=meta.get("extra", {}),
                          version=version)
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"métadonnées de checkpoint incomplètes : {exc}") from exc


def save_checkpoint(checkpoint: Checkpoint, path: str) -> None:
    atomic_write_bytes(path, encode_checkpoint(checkpoint))


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as f:
        return decode_checkpoint(f.read())
