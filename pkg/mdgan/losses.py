################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/losses.py                                                                                    #
# Date de modification : 19.10.2026                                                                            #
# Description : Termes d'objectif : perte adverse, perte de contenu L1, matrices de Gram, perte de classement  #
# et totaux par étage.                                                                                         #
################################################################################################################

import logging
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from mdgan.constants import LAMBDA_RANK, SCORE_CLAMP_EPS
from mdgan.errors import ConfigError, DimensionError
from mdgan.tensor import (Tensor, abs_, clamp, log, matmul_batched, reduce, reshape, softplus, transpose)

logger = logging.getLogger(__name__)

ADV_FORMS = ("saturating", "nonsaturating")
REDUCTIONS = ("mean", "sum")

CSV_HEADER = "iter,adv_d,adv_g,content,rank,total_g,total_d"


#--------------------------------------------------------------------------------------------------------------#
# Borne les scores du discriminateur dans [eps, 1 - eps] avant les logarithmes (journalisé si actif).          #
#--------------------------------------------------------------------------------------------------------------#
def _clamp_scores(scores: Tensor, label: str) -> Tensor:
    low, high = SCORE_CLAMP_EPS, 1.0 - SCORE_CLAMP_EPS
    v = scores.values
    if np.any(v < low) or np.any(v > high):
        logger.warning(f"Scores {label} saturés : bornés dans [{low:g}, 1 - {low:g}]")
    return clamp(scores, low, high)


#--------------------------------------------------------------------------------------------------------------#
# Perte du discriminateur : -mean[log d_real + log(1 - d_fake)].                                               #
#--------------------------------------------------------------------------------------------------------------#
def discriminator_adversarial(d_real: Tensor, d_fake: Tensor) -> Tensor:
    if d_real.shape != d_fake.shape:
        raise DimensionError(f"scores de formes différentes : {d_real.shape} et {d_fake.shape}")
    d_real = _clamp_scores(d_real, "réels")
    d_fake = _clamp_scores(d_fake, "générés")
    return -(reduce("mean", log(d_real)) + reduce("mean", log(1.0 - d_fake)))


#--------------------------------------------------------------------------------------------------------------#
# Perte du générateur : mean[log(1 - d_fake)] (forme saturante) ou -mean[log d_fake].                          #
#--------------------------------------------------------------------------------------------------------------#
def generator_adversarial(d_fake: Tensor, form: str = "saturating") -> Tensor:
    if form not in ADV_FORMS:
        raise ConfigError(f"forme adverse inconnue : {form}")
    d_fake = _clamp_scores(d_fake, "générés")
    if form == "saturating":
        return reduce("mean", log(1.0 - d_fake))
    return -reduce("mean", log(d_fake))


def adversarial_terms(d_real: Tensor, d_fake: Tensor, form: str = "saturating") -> tuple:
    return discriminator_adversarial(d_real, d_fake), generator_adversarial(d_fake, form)


#--------------------------------------------------------------------------------------------------------------#
# Perte de contenu L1 entre la vidéo réelle et la vidéo générée (moyenne ou somme des écarts absolus).         #
#--------------------------------------------------------------------------------------------------------------#
def content_loss(y: Tensor, y_hat: Tensor, reduction: str = "mean") -> Tensor:
    if y.shape != y_hat.shape:
        raise DimensionError(f"perte de contenu : formes {y.shape} et {y_hat.shape}")
    if reduction not in REDUCTIONS:
        raise ConfigError(f"réduction inconnue : {reduction}")
    return reduce(reduction, abs_(y - y_hat))


@dataclass
class GramDescriptor:
    matrix: Tensor
    layer_id: str
    scale: float


#--------------------------------------------------------------------------------------------------------------#
# Matrice de Gram canal-temps : (1 / (M·S)) Σ_n H_n H_nᵀ avec H_n de forme [M = C·T, S = H·W].                 #
#--------------------------------------------------------------------------------------------------------------#
def gram(features: Tensor, layer_id: str = "", batch_reduction: str = "sum") -> GramDescriptor:
    if features.ndim != 5:
        raise DimensionError(f"features [N, C, T, H, W] attendues, reçu {features.shape}")
    if batch_reduction not in REDUCTIONS:
        raise ConfigError(f"réduction de lot inconnue : {batch_reduction}")
    N, C, T, H, W = features.shape
    M, S = C * T, H * W
    flat = reshape(features, (N, M, S))
    per_sample = matmul_batched(flat, transpose(flat, (0, 2, 1)))
    divisor = M * S * (N if batch_reduction == "mean" else 1)
    matrix = reduce("sum", per_sample, axes=0) / divisor
    return GramDescriptor(matrix=matrix, layer_id=layer_id, scale=1.0 / divisor)


def _check_pair(a: GramDescriptor, b: GramDescriptor) -> None:
    if a.layer_id != b.layer_id:
        raise DimensionError(f"Gram de couches différentes : {a.layer_id} et {b.layer_id}")
    if a.matrix.shape != b.matrix.shape:
        raise DimensionError(f"Gram de formes différentes : {a.matrix.shape} et {b.matrix.shape}")


#--------------------------------------------------------------------------------------------------------------#
# Distances L1 sommées d⁺ = |g2 - g|₁ (vers le réel) et d⁻ = |g2 - g1|₁ (vers l'entrée de l'étage 1).          #
#--------------------------------------------------------------------------------------------------------------#
def ranking_distances(g1: GramDescriptor, g2: GramDescriptor, g: GramDescriptor) -> tuple:
    _check_pair(g2, g)
    _check_pair(g2, g1)
    d_plus = reduce("sum", abs_(g2.matrix - g.matrix))
    d_minus = reduce("sum", abs_(g2.matrix - g1.matrix))
    return d_plus, d_minus


#--------------------------------------------------------------------------------------------------------------#
# Perte de classement d'une couche : -log softmax du candidat réel, soit softplus(d⁺ - d⁻) en forme stable.    #
#--------------------------------------------------------------------------------------------------------------#
def rank_loss_layer(g1: GramDescriptor, g2: GramDescriptor, g: GramDescriptor) -> Tensor:
    d_plus, d_minus = ranking_distances(g1, g2, g)
    return softplus(d_plus - d_minus)


def rank_loss_total(taps: Iterable) -> Tensor:
    taps = list(taps)
    if not taps:
        raise ConfigError("aucune couche de features pour la perte de classement")
    total = rank_loss_layer(*taps[0])
    for triple in taps[1:]:
        total = total + rank_loss_layer(*triple)
    return total


#--------------------------------------------------------------------------------------------------------------#
# Perte de classement totale à partir des features du discriminateur pour Y₁, Y₂ et Y (mêmes couches).         #
#--------------------------------------------------------------------------------------------------------------#
def rank_loss_from_features(f_y1: dict, f_y2: dict, f_y: dict, batch_reduction: str = "sum") -> Tensor:
    taps = []
    for layer_id in f_y2:
        if layer_id not in f_y1 or layer_id not in f_y:
            raise DimensionError(f"features manquantes pour la couche {layer_id}")
        taps.append((gram(f_y1[layer_id], layer_id, batch_reduction),
                     gram(f_y2[layer_id], layer_id, batch_reduction),
                     gram(f_y[layer_id], layer_id, batch_reduction)))
    return rank_loss_total(taps)


#--------------------------------------------------------------------------------------------------------------#
# Objectif du générateur : adverse + λ·classement + contenu (le terme de classement disparaît si λ = 0).       #
#--------------------------------------------------------------------------------------------------------------#
def generator_total(adv_g: Tensor, content: Tensor, rank: Union[Tensor, None] = None,
                    lambda_rank: float = LAMBDA_RANK) -> Tensor:
    total = adv_g
    if rank is not None and lambda_rank != 0.0:
        total = total + rank * float(lambda_rank)
    return total + content


#--------------------------------------------------------------------------------------------------------------#
# Objectif minimisé par D2 : perte adverse moins λ·classement (montée de gradient sur l'objectif d'origine).   #
#--------------------------------------------------------------------------------------------------------------#
def discriminator_total(adv_d: Tensor, rank: Union[Tensor, None] = None,
                        lambda_rank: float = LAMBDA_RANK) -> Tensor:
    if rank is None or lambda_rank == 0.0:
        return adv_d
    return adv_d - rank * float(lambda_rank)


def _scalar(value) -> float:
    return value.item() if isinstance(value, Tensor) else float(value)


#--------------------------------------------------------------------------------------------------------------#
# Bilan d'une itération ; sérialisé en une ligne CSV (iter, adv_d, adv_g, content, rank, total_g, total_d).    #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class LossReport:
    iteration: int
    adv_d: float
    adv_g: float
    content: float
    rank: float = 0.0
    total_g: float = 0.0
    total_d: float = 0.0
    lambda_rank: float = 0.0
    stage: int = 1
    extra: dict = field(default_factory=dict)

    def csv_row(self) -> str:
        values = (self.adv_d, self.adv_g, self.content, self.rank, self.total_g, self.total_d)
        return ",".join([str(self.iteration)] + [repr(float(v)) for v in values])

    def progress_line(self) -> str:
        return (f"iter={self.iteration} adv_d={self.adv_d:.6g} adv_g={self.adv_g:.6g} "
                f"content={self.content:.6g} rank={self.rank:.6g}")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite([self.adv_d, self.adv_g, self.content, self.rank,
                                        self.total_g, self.total_d])))


#--------------------------------------------------------------------------------------------------------------#
# Bilan de l'étage 1 : total_g = adverse + contenu, total_d = perte adverse de D1.                             #
#--------------------------------------------------------------------------------------------------------------#
def stage1_objective(adv_g, content, adv_d, iteration: int = 0) -> LossReport:
    adv_g, content, adv_d = _scalar(adv_g), _scalar(content), _scalar(adv_d)
    return LossReport(iteration=iteration, adv_d=adv_d, adv_g=adv_g, content=content, rank=0.0,
                      total_g=adv_g + content, total_d=adv_d, lambda_rank=0.0, stage=1)


#--------------------------------------------------------------------------------------------------------------#
# Bilan de l'étage 2 : total_g = adverse + λ·classement + contenu, total_d = adverse - λ·classement.           #
#--------------------------------------------------------------------------------------------------------------#
def stage2_objective(adv_g, rank, content, adv_d, lambda_rank: float = LAMBDA_RANK,
                     iteration: int = 0) -> LossReport:
    adv_g, rank, content, adv_d = _scalar(adv_g), _scalar(rank), _scalar(content), _scalar(adv_d)
    weighted = lambda_rank * rank if lambda_rank != 0.0 else 0.0
    return LossReport(iteration=iteration, adv_d=adv_d, adv_g=adv_g, content=content, rank=rank,
                      total_g=adv_g + weighted + content, total_d=adv_d - weighted,
                      lambda_rank=lambda_rank, stage=2)
