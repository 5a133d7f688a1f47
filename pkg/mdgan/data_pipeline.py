################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/data_pipeline.py                                                                             #
# Date de modification : 19.10.2026                                                                            #
# Description : Chaîne de données : frames -> clips de 32 images sans chevauchement, split par source, lots    #
# normalisés, export PPM.                                                                                      #
################################################################################################################

import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from mdgan.constants import (CHANNELS, CLIP_LENGTH, CLIPS_DIR, FRAME_EXTENSIONS, MANIFEST_NAME, RESOLUTIONS,
                             STORE_INFO_NAME, STRIP_FRAMES)
from mdgan.data_store import atomic_write_bytes, atomic_write_json, read_jsonl, safe_load_json, write_jsonl
from mdgan.errors import ConfigError, DataError, DimensionError, IntegrityError
from mdgan.models import duplicate_frame
from mdgan.tensor import Tensor
from mdgan.tensor_io import decode_array, encode_array

logger = logging.getLogger(__name__)

SPLITS = ("train", "test")
UNASSIGNED = "unassigned"


@dataclass(frozen=True)
class SourceVideo:
    source_id: str
    frames: tuple
    width: int
    height: int


#--------------------------------------------------------------------------------------------------------------#
# Un clip du store : source, index dans la source, fichier MDT1 (u8 [3, 32, H, W]) et split.                   #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class ClipRecord:
    source_id: str
    clip_index: int
    file: str
    split: str
    h: int
    w: int

    @property
    def clip_id(self) -> str:
        return f"{self.source_id}_{self.clip_index:05d}"

    def to_json(self) -> dict:
        return {"source_id": self.source_id, "clip_index": self.clip_index, "file": self.file,
                "split": self.split, "h": self.h, "w": self.w}

    @classmethod
    def from_json(cls, record: dict) -> "ClipRecord":
        try:
            return cls(source_id=str(record["source_id"]), clip_index=int(record["clip_index"]),
                       file=str(record["file"]), split=str(record["split"]), h=int(record["h"]), w=int(record["w"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise IntegrityError(f"enregistrement de manifeste invalide : {record}") from exc


#--------------------------------------------------------------------------------------------------------------#
# Clé de tri « naturelle » : frame2 avant frame10.                                                             #
#--------------------------------------------------------------------------------------------------------------#
def natural_key(name: str) -> list:
    return [int(part) if part.isdigit() else part.lower() for part in re.split(r"(\d+)", name)]


# Normalisation

def normalize(pixels: np.ndarray, dtype=np.float32) -> np.ndarray:
    return pixels.astype(dtype) / np.asarray(127.5, dtype=dtype) - np.asarray(1.0, dtype=dtype)


#--------------------------------------------------------------------------------------------------------------#
# Inverse de normalize : arrondi au plus proche et bornage dans [0, 255].                                      #
#--------------------------------------------------------------------------------------------------------------#
def denormalize(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint((np.asarray(values, dtype=np.float64) + 1.0) * 127.5), 0, 255).astype(np.uint8)


# Lecture des frames

def read_frame(path: str) -> np.ndarray:
    with Image.open(path) as im:
        im.load()
        if im.mode != "RGB":
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.uint8).copy()


#--------------------------------------------------------------------------------------------------------------#
# Lit une frame et la redimensionne en carré (bilinéaire, facteurs x et y indépendants, sans recadrage).       #
#--------------------------------------------------------------------------------------------------------------#
def read_frame_resized(path: str, resolution: int) -> np.ndarray:
    with Image.open(path) as im:
        im.load()
        if im.mode != "RGB":
            im = im.convert("RGB")
        if im.size != (resolution, resolution):
            im = im.resize((resolution, resolution), Image.Resampling.BILINEAR)
        return np.asarray(im, dtype=np.uint8).copy()


#--------------------------------------------------------------------------------------------------------------#
# Recense les sources : un sous-dossier de frame_root par vidéo, frames triées naturellement.                  #
#--------------------------------------------------------------------------------------------------------------#
def discover_sources(frame_root: str) -> list[SourceVideo]:
    if not os.path.isdir(frame_root):
        raise DataError(f"dossier de frames introuvable : {frame_root}")
    sources = []
    for entry in sorted(os.listdir(frame_root), key=natural_key):
        folder = os.path.join(frame_root, entry)
        if not os.path.isdir(folder):
            continue
        names = [n for n in os.listdir(folder) if n.lower().endswith(FRAME_EXTENSIONS)]
        if not names:
            logger.warning(f"Source {entry} ignorée : aucune frame PPM/PNG")
            continue
        frames = tuple(os.path.join(folder, n) for n in sorted(names, key=natural_key))
        sources.append(SourceVideo(entry, frames, width=0, height=0))
    return sources


#--------------------------------------------------------------------------------------------------------------#
# Vérifie que toutes les frames d'une source sont lisibles et de mêmes dimensions.                             #
#--------------------------------------------------------------------------------------------------------------#
def _scan_source(source: SourceVideo) -> SourceVideo:
    size = None
    for path in source.frames:
        with Image.open(path) as im:
            if size is None:
                size = im.size
            elif im.size != size:
                raise DataError(f"{path} : dimensions {im.size} différentes de {size}")
    return SourceVideo(source.source_id, source.frames, width=size[0], height=size[1])


#--------------------------------------------------------------------------------------------------------------#
# Découpe une source en ⌊F/32⌋ clips consécutifs et les écrit ; renvoie None si la source est inutilisable.    #
#--------------------------------------------------------------------------------------------------------------#
def _ingest_source(source: SourceVideo, out_store: str, resolution: int) -> Optional[list]:
    try:
        source = _scan_source(source)
        n_clips = len(source.frames) // CLIP_LENGTH
        if n_clips == 0:
            logger.warning(f"Source {source.source_id} : {len(source.frames)} frames, moins de {CLIP_LENGTH} -> 0 clip")
            return []
        # Tout décoder avant d'écrire : une frame illisible ne laisse pas de clip partiel
        blocks = []
        for c in range(n_clips):
            block = np.empty((CHANNELS, CLIP_LENGTH, resolution, resolution), dtype=np.uint8)
            for t in range(CLIP_LENGTH):
                frame = read_frame_resized(source.frames[c * CLIP_LENGTH + t], resolution)
                block[:, t] = frame.transpose(2, 0, 1)
            blocks.append(block)
    except (OSError, UnidentifiedImageError, DataError, ValueError, SyntaxError) as exc:
        logger.warning(f"Source {source.source_id} ignorée : {exc}")
        return None

    records = []
    for c, block in enumerate(blocks):
        rel = f"{CLIPS_DIR}/{source.source_id}_{c:05d}.mdt"
        atomic_write_bytes(os.path.join(out_store, rel), encode_array(block))
        records.append(ClipRecord(source.source_id, c, rel, UNASSIGNED, resolution, resolution))
    dropped = len(source.frames) - n_clips * CLIP_LENGTH
    logger.info(f"Source {source.source_id} : {n_clips} clip(s), {dropped} frame(s) finale(s) écartée(s)")
    return records


#--------------------------------------------------------------------------------------------------------------#
# Ingère un dossier de frames dans un store de clips (une source par worker) et écrit manifeste + store.json.  #
#--------------------------------------------------------------------------------------------------------------#
def ingest(frame_root: str, out_store: str, target_resolution: int, workers: int = 1) -> list[ClipRecord]:
    if target_resolution not in RESOLUTIONS:
        raise ConfigError(f"résolution {target_resolution} non supportée")
    sources = discover_sources(frame_root)
    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        results = list(pool.map(lambda s: _ingest_source(s, out_store, target_resolution), sources))

    records, info = [], {}
    for source, result in zip(sources, results):
        if result is None:
            continue
        records.extend(result)
        info[source.source_id] = {"frames": len(source.frames), "clips": len(result)}
    if not records:
        raise DataError(f"aucune source exploitable dans {frame_root}")

    write_jsonl(os.path.join(out_store, MANIFEST_NAME), [r.to_json() for r in records])
    atomic_write_json(os.path.join(out_store, STORE_INFO_NAME),
                      {"resolution": target_resolution, "clip_length": CLIP_LENGTH, "sources": info})
    logger.info(f"Ingestion terminée : {len(records)} clip(s) depuis {len(info)} source(s)")
    return records


#--------------------------------------------------------------------------------------------------------------#
# Répartit les sources (jamais les clips) entre train et test pour approcher la fraction de test demandée.     #
#--------------------------------------------------------------------------------------------------------------#
def split(records: Sequence[ClipRecord], test_fraction: float, seed: int) -> list[ClipRecord]:
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"fraction de test hors de ]0, 1[ : {test_fraction}")
    counts = {}
    for r in records:
        counts[r.source_id] = counts.get(r.source_id, 0) + 1
    sources = list(counts)
    if len(sources) < 2:
        raise ConfigError(f"au moins 2 sources nécessaires pour un split, {len(sources)} trouvée(s)")

    rng = np.random.default_rng(seed)
    target = test_fraction * len(records)
    test, acc = set(), 0
    for idx in rng.permutation(len(sources)):
        if acc >= target or len(test) == len(sources) - 1:
            break
        src = sources[idx]
        # Ajout seulement s'il rapproche du nombre de clips visé
        if not test or abs(acc + counts[src] - target) <= abs(acc - target):
            test.add(src)
            acc += counts[src]
    return [ClipRecord(r.source_id, r.clip_index, r.file, "test" if r.source_id in test else "train", r.h, r.w)
            for r in records]


def split_store(store_dir: str, test_fraction: float, seed: int) -> list[ClipRecord]:
    path = os.path.join(store_dir, MANIFEST_NAME)
    records = split([ClipRecord.from_json(r) for r in read_jsonl(path)], test_fraction, seed)
    write_jsonl(path, [r.to_json() for r in records])
    return records


#--------------------------------------------------------------------------------------------------------------#
# Store de clips en lecture seule : manifeste, résolution et accès aux pixels par enregistrement.              #
#--------------------------------------------------------------------------------------------------------------#
class ClipStore:

    def __init__(self, root: str):
        self.root = root
        manifest = os.path.join(root, MANIFEST_NAME)
        if not os.path.exists(manifest):
            raise DataError(f"store de clips introuvable : {root}")
        info = safe_load_json(os.path.join(root, STORE_INFO_NAME), default=None)
        if not isinstance(info, dict) or "resolution" not in info:
            raise IntegrityError(f"{root} : {STORE_INFO_NAME} absent ou illisible")
        self.info = info
        self.resolution = int(info["resolution"])
        self.records = [ClipRecord.from_json(r) for r in read_jsonl(manifest)]

    def records_for(self, split_name: str) -> list[ClipRecord]:
        return [r for r in self.records if r.split == split_name]

    def split_counts(self) -> dict:
        counts = {}
        for r in self.records:
            counts[r.split] = counts.get(r.split, 0) + 1
        return counts

    def sources_for(self, split_name: str) -> list[str]:
        return sorted({r.source_id for r in self.records_for(split_name)}, key=natural_key)

    #--------------------------------------------------------------------------------------------------------------#
    # Pixels u8 [3, 32, H, W] d'un clip.                                                                           #
    #--------------------------------------------------------------------------------------------------------------#
    def load_pixels(self, record: ClipRecord) -> np.ndarray:
        with open(os.path.join(self.root, record.file), "rb") as f:
            data = f.read()
        arr, _ = decode_array(data)
        expected = (CHANNELS, CLIP_LENGTH, record.h, record.w)
        if arr.shape != expected or arr.dtype != np.uint8:
            raise IntegrityError(f"{record.file} : bloc {arr.dtype}{arr.shape}, u8{expected} attendu")
        return arr

    #--------------------------------------------------------------------------------------------------------------#
    # Contrôle d'intégrité : nombre de clips par source = ⌊F/32⌋ enregistré, fichiers présents, pas de fuite       #
    # train/test.                                                                                                  #
    #--------------------------------------------------------------------------------------------------------------#
    def verify(self) -> list[str]:
        problems = []
        per_source = {}
        for r in self.records:
            per_source.setdefault(r.source_id, []).append(r)
            if not os.path.exists(os.path.join(self.root, r.file)):
                problems.append(f"fichier manquant : {r.file}")
        for source_id, entry in self.info.get("sources", {}).items():
            expected = int(entry.get("frames", 0)) // CLIP_LENGTH
            found = len(per_source.get(source_id, []))
            if found != expected:
                problems.append(f"source {source_id} : {found} clip(s), {expected} attendu(s)")
        for source_id, recs in per_source.items():
            if len({r.split for r in recs}) > 1:
                problems.append(f"source {source_id} présente dans plusieurs splits")
        return problems


#--------------------------------------------------------------------------------------------------------------#
# Tirage des lots d'un split : permutation par époque, pas de doublon dans un lot tant que le split le permet. #
#--------------------------------------------------------------------------------------------------------------#
class ClipSampler:

    def __init__(self, store: ClipStore, split_name: str, batch_size: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.store = store
        self.records = store.records_for(split_name)
        if not self.records:
            raise DataError(f"split '{split_name}' vide dans {store.root}")
        if batch_size < 1:
            raise ConfigError(f"taille de lot invalide : {batch_size}")
        self.split_name = split_name
        self.batch_size = int(batch_size)
        self.rng = rng
        self.dtype = np.dtype(dtype)
        self.perm: list[int] = []
        self.cursor = 0
        self.epoch = 0
        if self.batch_size > len(self.records):
            logger.warning(f"Lot de {self.batch_size} > {len(self.records)} clip(s) en '{split_name}' : doublons inévitables")

    def _new_epoch(self, exclude: Sequence[int] = ()) -> None:
        perm = self.rng.permutation(len(self.records)).tolist()
        if exclude:
            # Les clips déjà tirés dans le lot courant passent en fin d'époque
            head = [i for i in perm if i not in exclude]
            perm = head + [i for i in perm if i in exclude]
        self.perm = perm
        self.cursor = 0
        self.epoch += 1

    def next_indices(self) -> list[int]:
        batch = []
        while len(batch) < self.batch_size:
            if self.cursor >= len(self.perm):
                self._new_epoch(batch if len(self.records) >= self.batch_size else ())
            batch.append(self.perm[self.cursor])
            self.cursor += 1
        return batch

    #--------------------------------------------------------------------------------------------------------------#
    # Lot suivant : Y normalisé [N, 3, 32, H, W] et X = première frame de chaque clip dupliquée 32 fois.           #
    #--------------------------------------------------------------------------------------------------------------#
    def next_batch(self) -> tuple:
        pixels = np.stack([self.store.load_pixels(self.records[i]) for i in self.next_indices()])
        Y = Tensor(normalize(pixels, self.dtype))
        X = duplicate_frame(Tensor(Y.values[:, :, 0]), CLIP_LENGTH)
        return Y, X

    def state(self) -> dict:
        return {"perm": list(self.perm), "cursor": self.cursor, "epoch": self.epoch,
                "rng": self.rng.bit_generator.state}

    def restore(self, state: dict) -> None:
        self.perm = [int(i) for i in state["perm"]]
        self.cursor = int(state["cursor"])
        self.epoch = int(state["epoch"])
        self.rng.bit_generator.state = state["rng"]


#--------------------------------------------------------------------------------------------------------------#
# Tire un lot depuis une graine ou un état de sampler ; renvoie (Y, X, nouvel état).                           #
#--------------------------------------------------------------------------------------------------------------#
def load_batch(store: ClipStore, split_name: str, batch_size: int, seed: int = 0,
               state: Optional[dict] = None, dtype=np.float32) -> tuple:
    sampler = ClipSampler(store, split_name, batch_size, np.random.default_rng(seed), dtype)
    if state is not None:
        sampler.restore(state)
    Y, X = sampler.next_batch()
    return Y, X, sampler.state()


def _as_clip_array(clip) -> np.ndarray:
    arr = clip.values if isinstance(clip, Tensor) else np.asarray(clip)
    if arr.ndim == 5 and arr.shape[0] == 1:
        arr = arr[0]
    if arr.ndim != 4 or arr.shape[0] != CHANNELS:
        raise DimensionError(f"clip [3, T, H, W] attendu, reçu {arr.shape}")
    return arr


#--------------------------------------------------------------------------------------------------------------#
# Pixels u8 [3, T, H, W] d'un clip, depuis des octets ou des valeurs dans [-1, 1] (bornées avec                #
# avertissement).                                                                                              #
#--------------------------------------------------------------------------------------------------------------#
def clip_to_pixels(clip) -> np.ndarray:
    arr = _as_clip_array(clip)
    if arr.dtype == np.uint8:
        return arr
    if np.any(arr < -1.0) or np.any(arr > 1.0):
        logger.warning("Valeurs hors de [-1, 1] à l'export : bornées dans [0, 255]")
    return denormalize(arr)


#--------------------------------------------------------------------------------------------------------------#
# Écrit les T frames d'un clip en PPM P6 (frame_00000.ppm, ...) ; renvoie la liste des chemins.                #
#--------------------------------------------------------------------------------------------------------------#
def export_clip(clip, out_dir: str, prefix: str = "frame") -> list[str]:
    pixels = clip_to_pixels(clip)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for t in range(pixels.shape[1]):
        path = os.path.join(out_dir, f"{prefix}_{t:05d}.ppm")
        Image.fromarray(np.ascontiguousarray(pixels[:, t].transpose(1, 2, 0))).save(path, format="PPM")
        paths.append(path)
    return paths


#--------------------------------------------------------------------------------------------------------------#
# Planche côte à côte des frames 1, 8, 16, 24 et 32 d'un clip (comparaison visuelle des étages).               #
#--------------------------------------------------------------------------------------------------------------#
def export_frame_strip(clip, path: str, frames: Sequence[int] = STRIP_FRAMES) -> str:
    pixels = clip_to_pixels(clip)
    frames = [t for t in frames if t < pixels.shape[1]]
    strip = np.concatenate([pixels[:, t].transpose(1, 2, 0) for t in frames], axis=1)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    Image.fromarray(np.ascontiguousarray(strip)).save(path, format="PPM")
    return path


#--------------------------------------------------------------------------------------------------------------#
# Relit les frames exportées d'un clip (ordre naturel) en pixels u8 [3, T, H, W].                              #
#--------------------------------------------------------------------------------------------------------------#
def import_clip(frame_dir: str) -> np.ndarray:
    names = sorted((n for n in os.listdir(frame_dir) if n.lower().endswith(FRAME_EXTENSIONS)), key=natural_key)
    if not names:
        raise DataError(f"aucune frame dans {frame_dir}")
    frames = [read_frame(os.path.join(frame_dir, n)) for n in names]
    return np.stack(frames).transpose(3, 0, 1, 2).copy()
