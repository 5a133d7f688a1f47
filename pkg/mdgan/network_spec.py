################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/network_spec.py                                                                              #
# Date de modification : 19.10.2026                                                                            #
# Description : Description déclarative des réseaux (générateurs G1/G2, discriminateurs D1/D2) et table        #
# récapitulative.                                                                                              #
################################################################################################################

from dataclasses import dataclass
from typing import Optional

from mdgan.constants import (CHANNELS, CLIP_LENGTH, DECODER_LAYERS, DEFAULT_GRAM_TAPS, ENCODER_LAYERS, RESOLUTIONS,
                             SCORE_LAYER, STAGE1_SKIPS, STAGE2_REMOVED_SKIPS)
from mdgan.errors import ConfigError, InternalConsistencyError
from mdgan.nn_ops import ACTIVATIONS, ConvParams


#--------------------------------------------------------------------------------------------------------------#
# Une couche : nom, géométrie, présence d'une BatchNorm et activation.                                         #
#--------------------------------------------------------------------------------------------------------------#
@dataclass(frozen=True)
class LayerSpec:
    name: str
    params: ConvParams
    batch_norm: bool
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"{self.name} : activation inconnue {self.activation}")

    @property
    def transposed(self) -> bool:
        return self.params.transposed


#--------------------------------------------------------------------------------------------------------------#
# Réseau complet : couches ordonnées, paires de skip (encodeur -> deconv), couches d'extraction de features.   #
#--------------------------------------------------------------------------------------------------------------#
@dataclass(frozen=True)
class NetworkSpec:
    role: str
    layers: tuple
    skip_map: tuple
    resolution: int
    width_multiplier: float = 1.0
    stage: Optional[int] = None
    feature_taps: tuple = ()
    clip_length: int = CLIP_LENGTH

    def __post_init__(self):
        self.validate()

    @property
    def name(self) -> str:
        if self.role == "generator":
            return f"G{self.stage}"
        return "D"

    def layer(self, name: str) -> LayerSpec:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    def layer_names(self) -> list[str]:
        return [layer.name for layer in self.layers]

    def input_shape(self, batch: int = 1) -> tuple:
        return (batch, CHANNELS, self.clip_length, self.resolution, self.resolution)

    #--------------------------------------------------------------------------------------------------------------#
    # Forme [N, C, T, H, W] produite par chaque couche (les skips n'en changent pas la forme).                     #
    #--------------------------------------------------------------------------------------------------------------#
    def output_shapes(self, batch: int = 1) -> dict:
        shapes = {}
        channels, extents = CHANNELS, self.input_shape(batch)[2:]
        for layer in self.layers:
            extents = layer.params.output_extents(extents)
            channels = layer.params.num_filters
            shapes[layer.name] = (batch, channels) + extents
        return shapes

    #--------------------------------------------------------------------------------------------------------------#
    # (couche, canaux d'entrée) dans l'ordre d'exécution.                                                          #
    #--------------------------------------------------------------------------------------------------------------#
    def layer_inputs(self) -> list:
        out, channels = [], CHANNELS
        for layer in self.layers:
            out.append((layer, channels))
            channels = layer.params.num_filters
        return out

    #--------------------------------------------------------------------------------------------------------------#
    # Vérifie que chaque jonction de skip additionne deux tenseurs de même forme et que G restitue la forme        #
    # d'entrée.                                                                                                    #
    #--------------------------------------------------------------------------------------------------------------#
    def validate(self) -> None:
        names = self.layer_names()
        if len(set(names)) != len(names):
            raise InternalConsistencyError(f"{self.name} : noms de couches dupliqués")
        shapes = self.output_shapes()
        previous = {names[i]: names[i - 1] for i in range(1, len(names))}
        for enc, dec in self.skip_map:
            if enc not in shapes or dec not in previous:
                raise InternalConsistencyError(f"{self.name} : skip {enc} -> {dec} vers une couche absente")
            if shapes[enc] != shapes[previous[dec]]:
                raise InternalConsistencyError(
                    f"{self.name} : skip {enc} -> {dec} de forme {shapes[enc]}, {shapes[previous[dec]]} attendu")
        if self.role == "generator" and shapes[names[-1]] != self.input_shape():
            raise InternalConsistencyError(f"{self.name} : sortie {shapes[names[-1]]} != entrée {self.input_shape()}")
        for tap in self.feature_taps:
            if tap not in shapes:
                raise InternalConsistencyError(f"{self.name} : couche d'extraction {tap} absente")

    #--------------------------------------------------------------------------------------------------------------#
    # Formes des paramètres nommés, dans l'ordre des couches ("<couche>.weight", "<couche>.bn.gamma", ...).        #
    #--------------------------------------------------------------------------------------------------------------#
    def parameter_shapes(self) -> dict:
        shapes = {}
        for layer, in_channels in self.layer_inputs():
            p = layer.params
            if p.transposed:
                shapes[f"{layer.name}.weight"] = (in_channels, p.num_filters) + p.kernel
            else:
                shapes[f"{layer.name}.weight"] = (p.num_filters, in_channels) + p.kernel
            shapes[f"{layer.name}.bias"] = (p.num_filters,)
            if layer.batch_norm:
                shapes[f"{layer.name}.bn.gamma"] = (p.num_filters,)
                shapes[f"{layer.name}.bn.beta"] = (p.num_filters,)
        return shapes

    def parameter_count(self) -> int:
        total = 0
        for shape in self.parameter_shapes().values():
            n = 1
            for d in shape:
                n *= d
            total += n
        return total

    #--------------------------------------------------------------------------------------------------------------#
    # Table lisible : une ligne par couche (type, filtres, noyau, stride, padding, BN, activation, forme de        #
    # sortie).                                                                                                     #
    #--------------------------------------------------------------------------------------------------------------#
    def summary_table(self) -> str:
        shapes = self.output_shapes()
        params = self.parameter_shapes()
        header = (f"{'couche':<8} {'type':<7} {'filtres':>7} {'noyau':<10} {'stride':<10} {'padding':<10} "
                  f"{'bn':<3} {'activation':<11} {'sortie (C,T,H,W)':<20} {'params':>10}")
        lines = [f"{self.name} - résolution {self.resolution}, largeur x{self.width_multiplier:g}", header,
                 "-" * len(header)]
        for layer in self.layers:
            p = layer.params
            count = 0
            for key, shape in params.items():
                if key.startswith(layer.name + "."):
                    n = 1
                    for d in shape:
                        n *= d
                    count += n
            kind = "deconv" if p.transposed else "conv"
            lines.append(
                f"{layer.name:<8} {kind:<7} {p.num_filters:>7} {_fmt(p.kernel):<10} {_fmt(p.stride):<10} "
                f"{_fmt(p.padding):<10} {'oui' if layer.batch_norm else 'non':<3} {layer.activation:<11} "
                f"{_fmt(shapes[layer.name][1:]):<20} {count:>10}")
        for enc, dec in self.skip_map:
            lines.append(f"skip {enc} -> entrée de {dec}")
        if self.feature_taps:
            lines.append(f"features de Gram : {', '.join(self.feature_taps)}")
        lines.append(f"total paramètres : {self.parameter_count()}")
        return "\n".join(lines)


def _fmt(values) -> str:
    return "x".join(str(v) for v in values)


def _check_resolution(resolution: int) -> None:
    if resolution not in RESOLUTIONS:
        raise ConfigError(f"résolution {resolution} non supportée (attendu : {', '.join(map(str, RESOLUTIONS))})")


def _check_width(width_multiplier: float) -> None:
    if not width_multiplier > 0:
        raise ConfigError(f"multiplicateur de largeur invalide : {width_multiplier}")


def scaled_filters(filters: int, width_multiplier: float) -> int:
    return max(1, int(round(filters * width_multiplier)))


#--------------------------------------------------------------------------------------------------------------#
# Encodeur de référence pour une résolution (à 64, conv1 disparaît et conv2 devient la première couche).       #
#--------------------------------------------------------------------------------------------------------------#
def _encoder_rows(resolution: int) -> tuple:
    return ENCODER_LAYERS if resolution == 128 else ENCODER_LAYERS[1:]


#--------------------------------------------------------------------------------------------------------------#
# Construit G1 (stage 1, 5 skips à 128) ou G2 (stage 2, sans les skips conv1/conv2).                           #
#--------------------------------------------------------------------------------------------------------------#
def build_generator(stage: int, resolution: int = 128, width_multiplier: float = 1.0) -> NetworkSpec:
    if stage not in (1, 2):
        raise ConfigError(f"étage inconnu : {stage}")
    _check_resolution(resolution)
    _check_width(width_multiplier)

    encoder = _encoder_rows(resolution)
    decoder = DECODER_LAYERS if resolution == 128 else DECODER_LAYERS[:-1]
    layers = []
    for i, (name, filters, kernel, stride, padding) in enumerate(encoder):
        # Première couche et conv6 sans BatchNorm
        bn = i != 0 and name != "conv6"
        params = ConvParams(scaled_filters(filters, width_multiplier), kernel, stride, padding)
        layers.append(LayerSpec(name, params, bn, "leaky_relu"))
    for i, (name, filters, kernel, stride, padding) in enumerate(decoder):
        output = i == len(decoder) - 1
        num = CHANNELS if output else scaled_filters(filters, width_multiplier)
        params = ConvParams(num, kernel, stride, padding, transposed=True)
        layers.append(LayerSpec(name, params, not output, "tanh" if output else "relu"))

    present = {layer.name for layer in layers}
    removed = STAGE2_REMOVED_SKIPS if stage == 2 else ()
    skips = tuple(pair for pair in STAGE1_SKIPS
                  if pair not in removed and pair[0] in present and pair[1] in present)
    return NetworkSpec("generator", tuple(layers), skips, resolution, width_multiplier, stage)


#--------------------------------------------------------------------------------------------------------------#
# Construit un discriminateur : encodeur conv1..conv5, couche de score sigmoid, features lues aux ordinaux     #
# demandés.                                                                                                    #
#--------------------------------------------------------------------------------------------------------------#
def build_discriminator(resolution: int = 128, width_multiplier: float = 1.0,
                        taps=DEFAULT_GRAM_TAPS) -> NetworkSpec:
    _check_resolution(resolution)
    _check_width(width_multiplier)

    layers = []
    encoder = [row for row in _encoder_rows(resolution) if row[0] != "conv6"]
    for i, (name, filters, kernel, stride, padding) in enumerate(encoder):
        params = ConvParams(scaled_filters(filters, width_multiplier), kernel, stride, padding)
        layers.append(LayerSpec(name, params, i != 0, "leaky_relu"))
    name, filters, kernel, stride, padding = SCORE_LAYER
    layers.append(LayerSpec(name, ConvParams(filters, kernel, stride, padding), False, "sigmoid"))

    tap_names = []
    for ordinal in taps:
        if not 1 <= int(ordinal) <= len(encoder):
            raise ConfigError(f"ordinal de couche {ordinal} hors de 1..{len(encoder)}")
        tap_names.append(encoder[int(ordinal) - 1][0])
    return NetworkSpec("discriminator", tuple(layers), (), resolution, width_multiplier,
                       feature_taps=tuple(dict.fromkeys(tap_names)))
