################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/pipeline.py                                                                                  #
# Date de modification : 19.10.2026                                                                            #
# Description : Chaîne de prédiction reconstruite depuis un checkpoint : G1 seul (étage 1) ou G1 puis G2       #
# (étage 2).                                                                                                   #
################################################################################################################

from typing import Optional

import numpy as np

from mdgan.checkpoint import Checkpoint
from mdgan.config import RunConfig, build_config
from mdgan.constants import CLIP_LENGTH
from mdgan.data_pipeline import normalize
from mdgan.errors import ConfigError, ValidationError
from mdgan.models import duplicate_frame, forward_generator
from mdgan.network_spec import NetworkSpec, build_generator
from mdgan.nn_ops import ParameterSet
from mdgan.tensor import Tensor, no_grad


#--------------------------------------------------------------------------------------------------------------#
# Vérifie qu'un jeu de paramètres a exactement les formes attendues par une NetworkSpec.                       #
#--------------------------------------------------------------------------------------------------------------#
def check_parameters(spec: NetworkSpec, params: ParameterSet, label: str) -> None:
    expected = spec.parameter_shapes()
    found = params.shapes()
    if expected != found:
        missing = sorted(set(expected) - set(found))
        wrong = sorted(k for k in expected if k in found and expected[k] != found[k])
        raise ConfigError(f"{label} incompatible avec {spec.name} (absents : {missing[:3]}, formes : {wrong[:3]})")


#--------------------------------------------------------------------------------------------------------------#
# Prédicteur vidéo en inférence : duplique la frame d'entrée puis applique les générateurs de l'étage demandé. #
#--------------------------------------------------------------------------------------------------------------#
class VideoPipeline:

    def __init__(self, config: RunConfig, g1_spec: NetworkSpec, g1_params: ParameterSet,
                 g2_spec: Optional[NetworkSpec] = None, g2_params: Optional[ParameterSet] = None,
                 bn_inference: Optional[str] = None):
        self.config = config
        self.g1_spec, self.g1_params = g1_spec, g1_params
        self.g2_spec, self.g2_params = g2_spec, g2_params
        self.bn_inference = bn_inference or config.bn_inference

    @property
    def stage(self) -> int:
        return 2 if self.g2_spec is not None else 1

    @property
    def resolution(self) -> int:
        return self.g1_spec.resolution

    @property
    def dtype(self) -> np.dtype:
        return self.g1_params[self.g1_spec.layers[0].name + ".weight"].dtype

    #--------------------------------------------------------------------------------------------------------------#
    # Reconstruit la chaîne d'un checkpoint ; stage=1 tronque un checkpoint d'étage 2 à son G1.                    #
    #--------------------------------------------------------------------------------------------------------------#
    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint, stage: Optional[int] = None,
                        bn_inference: Optional[str] = None) -> "VideoPipeline":
        config = build_config(checkpoint.config)
        stage = checkpoint.stage if stage is None else stage
        if stage not in (1, 2) or stage > checkpoint.stage:
            raise ConfigError(f"étage {stage} indisponible dans un checkpoint d'étage {checkpoint.stage}")
        kw = {"bn_momentum": config.bn_momentum, "bn_eps": config.bn_eps, "requires_grad": False}
        g1_spec = build_generator(1, config.resolution, config.width_multiplier)
        g1_prefix = "g1." if checkpoint.stage == 2 else "g."
        g1_params = ParameterSet.from_arrays(checkpoint.arrays, g1_prefix, **kw)
        check_parameters(g1_spec, g1_params, "G1 du checkpoint")
        g2_spec = g2_params = None
        if stage == 2:
            g2_spec = build_generator(2, config.resolution, config.width_multiplier)
            g2_params = ParameterSet.from_arrays(checkpoint.arrays, "g.", **kw)
            check_parameters(g2_spec, g2_params, "G2 du checkpoint")
        return cls(config, g1_spec, g1_params, g2_spec, g2_params, bn_inference)

    def _forward(self, spec: NetworkSpec, params: ParameterSet, video: Tensor) -> Tensor:
        mode = "inference" if self.bn_inference == "running" else "train"
        return forward_generator(spec, params, video, mode=mode, track_running=False).video

    #--------------------------------------------------------------------------------------------------------------#
    # Y₁ = G1(X), puis Y₂ = G2(Y₁) pour un pipeline d'étage 2.                                                     #
    #--------------------------------------------------------------------------------------------------------------#
    def predict(self, X) -> Tensor:
        X = Tensor(np.asarray(X.values if isinstance(X, Tensor) else X, dtype=self.dtype))
        with no_grad():
            video = self._forward(self.g1_spec, self.g1_params, X)
            if self.g2_spec is not None:
                video = self._forward(self.g2_spec, self.g2_params, video)
        return video

    #--------------------------------------------------------------------------------------------------------------#
    # Prédit une vidéo à partir d'une frame u8 [H, W, 3] de la résolution du modèle.                               #
    #--------------------------------------------------------------------------------------------------------------#
    def predict_frame(self, frame: np.ndarray) -> Tensor:
        if frame.ndim != 3 or frame.shape[:2] != (self.resolution, self.resolution):
            raise ValidationError(f"frame {frame.shape[1]}x{frame.shape[0]} ; le modèle attend "
                                  f"{self.resolution}x{self.resolution}")
        image = normalize(frame.transpose(2, 0, 1)[None], self.dtype)
        return self.predict(duplicate_frame(Tensor(image), CLIP_LENGTH))
