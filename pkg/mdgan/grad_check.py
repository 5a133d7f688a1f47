################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/grad_check.py                                                                                #
# Date de modification : 19.10.2026                                                                            #
# Description : Vérification des gradients analytiques par différences finies centrées.                        #
################################################################################################################

import math
from typing import Callable, Optional

import numpy as np

from mdgan.errors import ContractError
from mdgan.tensor import Tensor, no_grad


#--------------------------------------------------------------------------------------------------------------#
# Erreur relative maximale entre gradient analytique et différences centrées, sur tout ou partie des           #
# coordonnées. Le dénominateur ne descend pas sous min_scale : pour un gradient plus petit, l'écart est en     #
# pratique absolu.                                                                                             #
#--------------------------------------------------------------------------------------------------------------#
def grad_check(f: Callable[[Tensor], Tensor], input: Tensor, step: float = 1e-5,
               samples: Optional[int] = None, seed: int = 0, min_scale: float = 1e-3) -> float:
    if step <= 0:
        raise ContractError(f"pas de différence finie invalide : {step}")
    # Pas arrondi à une puissance de deux : x ± h exact en virgule flottante
    h = 2.0 ** round(math.log2(step))

    x0 = np.array(input.values, copy=True)
    x = Tensor(x0.copy(), requires_grad=True)
    out = f(x)
    if out.size != 1:
        raise ContractError(f"grad_check exige une sortie scalaire, forme {out.shape}")
    if out.requires_grad:
        out.backward()
    analytic = x.grad if x.grad is not None else np.zeros_like(x0)

    indices = np.arange(x0.size)
    if samples is not None and samples < x0.size:
        rng = np.random.default_rng(seed)
        indices = np.sort(rng.choice(x0.size, size=samples, replace=False))

    worst = 0.0
    with no_grad():
        for idx in indices:
            plus = x0.copy()
            plus.flat[idx] += h
            minus = x0.copy()
            minus.flat[idx] -= h
            numeric = (f(Tensor(plus)).item() - f(Tensor(minus)).item()) / (2.0 * h)
            a = float(analytic.flat[idx])
            err = abs(a - numeric) / max(abs(a), abs(numeric), min_scale)
            worst = max(worst, err)
    return worst
