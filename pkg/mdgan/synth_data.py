################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/synth_data.py                                                                                #
# Date de modification : 19.10.2026                                                                            #
# Description : Jeu de données synthétique : rampes en translation et disques mobiles sur fond fixe, ingérés   #
# dans un store.                                                                                               #
################################################################################################################

import logging
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from mdgan.data_pipeline import ingest, split_store
from mdgan.errors import ConfigError
from mdgan.seeding import RngStreams

logger = logging.getLogger(__name__)


#--------------------------------------------------------------------------------------------------------------#
# Paramètres de mouvement : vitesse en pixels/frame, rayon du disque (fraction de la taille), taille des       #
# frames.                                                                                                      #
#--------------------------------------------------------------------------------------------------------------#
@dataclass(frozen=True)
class MotionParams:
    velocity: float = 1.5
    disk_radius: float = 0.15
    frame_size: int = 64
    ramp_period: float = 24.0

    def __post_init__(self):
        if self.velocity < 0 or self.disk_radius <= 0 or self.frame_size < 8 or self.ramp_period <= 0:
            raise ConfigError(f"paramètres de mouvement invalides : {self}")


#--------------------------------------------------------------------------------------------------------------#
# Rend une source [F, taille, taille, 3] u8 : fond dégradé fixe, rampe sinusoïdale et disque qui se déplacent. #
#--------------------------------------------------------------------------------------------------------------#
def render_source(rng: np.random.Generator, n_frames: int, motion: MotionParams) -> np.ndarray:
    size = motion.frame_size
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    c_top, c_bottom, c_disk = rng.integers(0, 256, size=(3, 3)).astype(np.float64)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    vx, vy = motion.velocity * np.cos(angle), motion.velocity * np.sin(angle)
    cx0, cy0 = rng.uniform(0, size, size=2)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    radius = motion.disk_radius * size

    mix = (yy / (size - 1))[..., None]
    background = (1.0 - mix) * c_top + mix * c_bottom
    frames = np.empty((n_frames, size, size, 3), dtype=np.uint8)
    for t in range(n_frames):
        shift_x, shift_y = vx * t, vy * t
        ramp = 40.0 * np.sin(2.0 * np.pi * ((xx - shift_x) * np.cos(angle) + (yy - shift_y) * np.sin(angle))
                             / motion.ramp_period + phase)
        # Distance torique : le disque ressort du côté opposé
        dx = (xx - (cx0 + shift_x) + size / 2) % size - size / 2
        dy = (yy - (cy0 + shift_y) + size / 2) % size - size / 2
        inside = (dx * dx + dy * dy <= radius * radius)[..., None]
        frame = np.where(inside, c_disk, background + ramp[..., None])
        frames[t] = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
    return frames


#--------------------------------------------------------------------------------------------------------------#
# Génère n_sources vidéos (frames PPM), puis les ingère et les répartit via la chaîne standard.                #
#--------------------------------------------------------------------------------------------------------------#
def synthesize(out_store: str, n_sources: int, frames_per_source: int, motion: MotionParams = MotionParams(),
               seed: int = 0, resolution: int = 64, test_fraction: float = 0.25, workers: int = 1) -> list:
    if n_sources < 2:
        raise ConfigError(f"au moins 2 sources synthétiques nécessaires, {n_sources} demandée(s)")
    if frames_per_source < 1:
        raise ConfigError(f"nombre de frames invalide : {frames_per_source}")
    rng = RngStreams(seed).stream("synth")
    frames_root = os.path.join(out_store, "frames")
    for s in range(n_sources):
        folder = os.path.join(frames_root, f"synth_{s:03d}")
        os.makedirs(folder, exist_ok=True)
        for t, frame in enumerate(render_source(rng, frames_per_source, motion)):
            Image.fromarray(frame).save(os.path.join(folder, f"frame_{t:05d}.ppm"), format="PPM")
    logger.info(f"{n_sources} source(s) synthétique(s) de {frames_per_source} frames écrites dans {frames_root}")
    ingest(frames_root, out_store, resolution, workers=workers)
    return split_store(out_store, test_fraction, seed)
