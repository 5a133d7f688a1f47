################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/config.py                                                                                    #
# Date de modification : 19.10.2026                                                                            #
# Description : Configuration d'un run : valeurs par défaut, fichier key = value, surcharges --set, écho       #
# rejouable.                                                                                                   #
################################################################################################################

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from mdgan.constants import (ADAM_BETA1, ADAM_BETA2, ADAM_EPS, BN_EPS, BN_MOMENTUM, CHECKPOINT_EVERY,
                             DEFAULT_BATCH_SIZE, DEFAULT_GRAM_TAPS, LAMBDA_RANK, LEARNING_RATE, RESOLUTIONS)
from mdgan.data_store import default_runs_dir
from mdgan.errors import ConfigError


#--------------------------------------------------------------------------------------------------------------#
# Réglages d'un run ; toute clé a une valeur par défaut et les clés inconnues sont refusées.                   #
#--------------------------------------------------------------------------------------------------------------#
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    resolution: int = 128
    width_multiplier: float = 1.0
    batch_size: int = DEFAULT_BATCH_SIZE
    lr: float = LEARNING_RATE
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    adam_eps: float = ADAM_EPS
    bn_eps: float = BN_EPS
    bn_momentum: float = BN_MOMENTUM
    bn_inference: Literal["running", "batch"] = "running"
    lambda_rank: float = LAMBDA_RANK
    gram_taps: tuple[int, ...] = DEFAULT_GRAM_TAPS
    gram_batch_reduction: Literal["sum", "mean"] = "sum"
    loss_reduction: Literal["mean", "sum"] = "mean"
    adv_form: Literal["saturating", "nonsaturating"] = "saturating"
    g2_init: Literal["g1", "random"] = "g1"
    dtype: Literal["float32", "float64"] = "float32"
    seed: int = 0
    iterations: int = 1000
    checkpoint_every: int = CHECKPOINT_EVERY
    prefetch: int = 2
    progress_every: int = 1
    store: str = "store"
    out: str = default_runs_dir()
    g1_checkpoint: Optional[str] = None

    @field_validator("resolution")
    @classmethod
    def _check_resolution(cls, v: int) -> int:
        if v not in RESOLUTIONS:
            raise ValueError(f"résolution {v} non supportée")
        return v

    @field_validator("gram_taps", mode="before")
    @classmethod
    def _parse_taps(cls, v):
        if isinstance(v, str):
            return tuple(int(p) for p in v.replace(" ", "").split(",") if p)
        return v

    @field_validator("gram_taps")
    @classmethod
    def _check_taps(cls, v: tuple) -> tuple:
        if any(t < 1 for t in v):
            raise ValueError("les ordinaux de couches commencent à 1")
        return v

    @field_validator("width_multiplier", "lr", "adam_eps", "bn_eps")
    @classmethod
    def _check_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("doit être strictement positif")
        return v

    @field_validator("beta1", "beta2", "bn_momentum")
    @classmethod
    def _check_unit(cls, v: float) -> float:
        if not 0.0 <= v < 1.0:
            raise ValueError("doit être dans [0, 1[")
        return v

    @field_validator("batch_size", "checkpoint_every", "progress_every")
    @classmethod
    def _check_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("doit être >= 1")
        return v

    @field_validator("iterations", "prefetch", "lambda_rank")
    @classmethod
    def _check_non_negative(cls, v):
        if v < 0:
            raise ValueError("doit être >= 0")
        return v

    @property
    def np_dtype(self) -> np.dtype:
        return np.dtype(self.dtype)

    #--------------------------------------------------------------------------------------------------------------#
    # Écho texte rejouable (une ligne key = value par champ, dans l'ordre de déclaration).                         #
    #--------------------------------------------------------------------------------------------------------------#
    def to_text(self) -> str:
        lines = []
        for name in type(self).model_fields:
            value = getattr(self, name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{name} = {value}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")


#--------------------------------------------------------------------------------------------------------------#
# Lit un texte de configuration : lignes key = value, commentaires #, lignes vides ignorées.                   #
#--------------------------------------------------------------------------------------------------------------#
def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno} : 'key = value' attendu, reçu '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno} : clé vide")
        values[key] = value
    return values


def parse_override(item: str) -> tuple:
    if "=" not in item:
        raise ConfigError(f"surcharge invalide '{item}' (attendu key=value)")
    key, value = (part.strip() for part in item.split("=", 1))
    return key, value


#--------------------------------------------------------------------------------------------------------------#
# Construit la configuration effective : défauts < fichier < surcharges (--set puis options dédiées).          #
#--------------------------------------------------------------------------------------------------------------#
def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    values = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        except FileNotFoundError as exc:
            raise ConfigError(f"fichier de configuration introuvable : {path}") from exc
        values.update(parse_config_text(text, path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values)


def build_config(values: dict) -> RunConfig:
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])} : {err['msg']}" for err in exc.errors())
        raise ConfigError(f"configuration invalide ({problems})") from exc
