################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/models.py                                                                                    #
# Date de modification : 19.10.2026                                                                            #
# Description : Passes avant des générateurs (encodeur-décodeur à skips) et des discriminateurs 3D.            #
################################################################################################################

import logging
from dataclasses import dataclass, field

import numpy as np

from mdgan.constants import CLIP_LENGTH
from mdgan.errors import ContractError, DimensionError, InternalConsistencyError
from mdgan.nn_ops import ParameterSet, activation, batchnorm3d, conv3d, deconv3d
from mdgan.network_spec import LayerSpec, NetworkSpec
from mdgan.tensor import Tensor, as_tensor, clamp, repeat_axis, reshape

logger = logging.getLogger(__name__)


@dataclass
class GeneratorOutput:
    video: Tensor
    activations: dict = field(default_factory=dict)


#--------------------------------------------------------------------------------------------------------------#
# Répète une image [N, 3, H, W] sur T positions temporelles -> [N, 3, T, H, W].                                #
#--------------------------------------------------------------------------------------------------------------#
def duplicate_frame(x, T: int = CLIP_LENGTH) -> Tensor:
    if T < 1:
        raise ContractError(f"longueur de clip invalide : {T}")
    x = as_tensor(x)
    if x.ndim != 4:
        raise DimensionError(f"image [N, C, H, W] attendue, reçu {x.shape}")
    return repeat_axis(x, 2, T)


#--------------------------------------------------------------------------------------------------------------#
# Applique une couche : (dé)convolution, BatchNorm éventuelle puis activation.                                 #
#--------------------------------------------------------------------------------------------------------------#
def _apply_layer(layer: LayerSpec, params: ParameterSet, h: Tensor, mode: str, track_running: bool) -> Tensor:
    weight = params[f"{layer.name}.weight"]
    bias = params[f"{layer.name}.bias"]
    if layer.transposed:
        h = deconv3d(h, weight, bias, layer.params)
    else:
        h = conv3d(h, weight, bias, layer.params)
    if layer.batch_norm:
        h = batchnorm3d(h, params.bn_state(layer.name), mode, track_running)
    return activation(layer.activation, h)


def _check_video(spec: NetworkSpec, video: Tensor) -> None:
    if video.ndim != 5 or video.shape[1:] != spec.input_shape()[1:]:
        raise DimensionError(f"{spec.name} attend [N, {', '.join(map(str, spec.input_shape()[1:]))}], "
                             f"reçu {video.shape}")


#--------------------------------------------------------------------------------------------------------------#
# Passe avant d'un générateur : la sortie activée de chaque couche d'encodeur liée par un skip est ajoutée à   #
# l'entrée du deconv correspondant.                                                                            #
#--------------------------------------------------------------------------------------------------------------#
def forward_generator(spec: NetworkSpec, params: ParameterSet, X, mode: str = "train",
                      track_running: bool = True, keep_activations: bool = False) -> GeneratorOutput:
    X = as_tensor(X)
    _check_video(spec, X)
    sources = {dec: enc for enc, dec in spec.skip_map}
    cache = {}
    h = X
    for layer in spec.layers:
        if layer.name in sources:
            skip = cache[sources[layer.name]]
            if skip.shape != h.shape:
                raise InternalConsistencyError(f"jonction {sources[layer.name]} -> {layer.name} : "
                                               f"{skip.shape} != {h.shape}")
            h = h + skip
        h = _apply_layer(layer, params, h, mode, track_running)
        if keep_activations or not layer.transposed:
            cache[layer.name] = h
    return GeneratorOutput(video=h, activations=cache if keep_activations else {})


#--------------------------------------------------------------------------------------------------------------#
# Passe avant d'un discriminateur : score [N, 1] dans ]0, 1[ et features des couches d'extraction.             #
#--------------------------------------------------------------------------------------------------------------#
def forward_discriminator(spec: NetworkSpec, params: ParameterSet, video, mode: str = "train",
                          track_running: bool = True) -> tuple:
    video = as_tensor(video)
    _check_video(spec, video)
    if np.any(np.abs(video.values) > 1.0):
        logger.warning("Entrée du discriminateur hors de [-1, 1] : valeurs bornées")
        video = clamp(video, -1.0, 1.0)

    features = {}
    h = video
    for layer in spec.layers:
        h = _apply_layer(layer, params, h, mode, track_running)
        if layer.name in spec.feature_taps:
            features[layer.name] = h
    return reshape(h, (video.shape[0], 1)), features
