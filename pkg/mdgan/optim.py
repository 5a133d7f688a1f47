################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/optim.py                                                                                     #
# Date de modification : 19.10.2026                                                                            #
# Description : Optimiseur Adam (mise à jour corrigée du biais), état sérialisable dans les checkpoints.       #
################################################################################################################

from dataclasses import dataclass, field

import numpy as np

from mdgan.constants import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, LEARNING_RATE
from mdgan.errors import DimensionError, NonFiniteError


#--------------------------------------------------------------------------------------------------------------#
# Moments par paramètre (m, v), compteur de pas et hyperparamètres d'un optimiseur Adam.                       #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class AdamState:
    lr: float = LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def to_arrays(self, prefix: str) -> dict:
        arrays = {f"{prefix}m.{name}": arr.copy() for name, arr in self.m.items()}
        arrays.update({f"{prefix}v.{name}": arr.copy() for name, arr in self.v.items()})
        return arrays

    def scalars(self) -> dict:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps, "t": self.t}

    #--------------------------------------------------------------------------------------------------------------#
    # Reconstruit l'état à partir des tableaux et scalaires d'un checkpoint.                                       #
    #--------------------------------------------------------------------------------------------------------------#
    @classmethod
    def from_checkpoint(cls, arrays: dict, prefix: str, scalars: dict) -> "AdamState":
        state = cls(lr=scalars["lr"], beta1=scalars["beta1"], beta2=scalars["beta2"],
                    eps=scalars["eps"], t=int(scalars["t"]))
        for key, arr in arrays.items():
            if key.startswith(f"{prefix}m."):
                state.m[key[len(prefix) + 2:]] = np.array(arr, copy=True)
            elif key.startswith(f"{prefix}v."):
                state.v[key[len(prefix) + 2:]] = np.array(arr, copy=True)
        return state


#--------------------------------------------------------------------------------------------------------------#
# Un pas d'Adam sur un jeu de paramètres ; un gradient non fini interrompt le pas avant toute modification.    #
#--------------------------------------------------------------------------------------------------------------#
def adam_step(params, state: AdamState) -> None:
    items = list(params.items())
    grads = {}
    for name, p in items:
        g = p.grad if p.grad is not None else np.zeros_like(p.values)
        if g.shape != p.shape:
            raise DimensionError(f"gradient de {name} de forme {g.shape}, {p.shape} attendu")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"gradient non fini pour {name} (explosion du gradient)")
        grads[name] = g

    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for name, p in items:
        g = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        m = (1.0 - b1) * g if m is None else b1 * m + (1.0 - b1) * g
        v = (1.0 - b2) * g * g if v is None else b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        update = state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        # Réaffectation : les graphes existants gardent les anciennes valeurs
        p.values = (p.values - update).astype(p.values.dtype, copy=False)
