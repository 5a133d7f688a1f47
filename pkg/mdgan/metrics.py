################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/metrics.py                                                                                   #
# Date de modification : 19.10.2026                                                                            #
# Description : Métriques de qualité vidéo sur des valeurs dans [0, 1] : MSE, PSNR (plafonné) et SSIM          #
# gaussien.                                                                                                    #
################################################################################################################

import math

import numpy as np
from skimage.metrics import structural_similarity

from mdgan.constants import PSNR_CAP_DB, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_TRUNCATE, SSIM_WINDOW
from mdgan.errors import ConfigError, DimensionError
from mdgan.tensor import Tensor


def _as_array(x) -> np.ndarray:
    values = x.values if isinstance(x, Tensor) else x
    return np.asarray(values, dtype=np.float64)


def _pair(a, b) -> tuple:
    a, b = _as_array(a), _as_array(b)
    if a.shape != b.shape:
        raise DimensionError(f"formes différentes : {a.shape} et {b.shape}")
    return a, b


#--------------------------------------------------------------------------------------------------------------#
# Passe d'une vidéo dans [-1, 1] au domaine des métriques [0, 1] (bornage inclus).                             #
#--------------------------------------------------------------------------------------------------------------#
def to_unit_range(video) -> np.ndarray:
    return np.clip((_as_array(video) + 1.0) / 2.0, 0.0, 1.0)


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


#--------------------------------------------------------------------------------------------------------------#
# PSNR en dB pour une dynamique de 1 ; une erreur nulle donne le plafond de 100 dB.                            #
#--------------------------------------------------------------------------------------------------------------#
def psnr_from_mse(value: float) -> float:
    if value <= 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / value))


def psnr(a, b) -> float:
    return psnr_from_mse(mse(a, b))


#--------------------------------------------------------------------------------------------------------------#
# SSIM gaussien (fenêtre 11, sigma 1.5, covariance de population) par frame et par canal sur les deux          #
# derniers axes [..., H, W], moyenné uniformément sur les fenêtres valides.                                    #
#--------------------------------------------------------------------------------------------------------------#
def ssim(a, b) -> float:
    a, b = _pair(a, b)
    if a.ndim < 2 or min(a.shape[-2:]) < SSIM_WINDOW:
        raise ConfigError(f"frame {a.shape[-2:]} plus petite que la fenêtre SSIM {SSIM_WINDOW}")
    h, w = a.shape[-2:]
    planes_a, planes_b = a.reshape(-1, h, w), b.reshape(-1, h, w)
    values = [structural_similarity(pa, pb, data_range=1.0, gaussian_weights=True, sigma=SSIM_SIGMA,
                                    truncate=SSIM_TRUNCATE, use_sample_covariance=False, K1=SSIM_K1, K2=SSIM_K2)
              for pa, pb in zip(planes_a, planes_b)]
    return float(np.mean(values))


#--------------------------------------------------------------------------------------------------------------#
# PSNR moyen par frame d'une vidéo [3, T, H, W] (autre agrégation rapportée à côté du PSNR par clip).          #
#--------------------------------------------------------------------------------------------------------------#
def frame_psnr_mean(a, b) -> float:
    a, b = _pair(a, b)
    if a.ndim != 4:
        raise DimensionError(f"vidéo [C, T, H, W] attendue, reçu {a.shape}")
    per_frame = np.mean((a - b) ** 2, axis=(0, 2, 3))
    return float(np.mean([psnr_from_mse(float(m)) for m in per_frame]))
