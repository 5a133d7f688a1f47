################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/nn_ops.py                                                                                    #
# Date de modification : 19.10.2026                                                                            #
# Description : Opérations de réseau 3D différentiables : convolution, convolution transposée, BatchNorm,      #
# activations et initialisation.                                                                               #
################################################################################################################

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from mdgan.constants import BN_EPS, BN_MOMENTUM, INIT_STD, LEAKY_RELU_SLOPE
from mdgan.errors import ConfigError, ContractError, DimensionError
from mdgan.tensor import Tensor, _result

ACTIVATIONS = ("leaky_relu", "relu", "tanh", "sigmoid")
_SPATIAL_AXES = (2, 3, 4)
_STAT_AXES = (0, 2, 3, 4)


def _triple(value, label: str) -> tuple:
    if isinstance(value, (int, np.integer)):
        value = (int(value),) * 3
    value = tuple(int(v) for v in value)
    if len(value) != 3:
        raise ConfigError(f"{label} doit avoir 3 composantes (T, H, W), reçu {value}")
    return value


#--------------------------------------------------------------------------------------------------------------#
# Géométrie d'une couche (dé)convolutive : nombre de filtres, noyau, stride et padding (T, H, W).              #
#--------------------------------------------------------------------------------------------------------------#
@dataclass(frozen=True)
class ConvParams:
    num_filters: int
    kernel: tuple
    stride: tuple = (1, 1, 1)
    padding: tuple = (0, 0, 0)
    transposed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kernel", _triple(self.kernel, "kernel"))
        object.__setattr__(self, "stride", _triple(self.stride, "stride"))
        object.__setattr__(self, "padding", _triple(self.padding, "padding"))
        if self.num_filters < 1:
            raise ConfigError(f"nombre de filtres invalide : {self.num_filters}")
        if min(self.kernel) < 1 or min(self.stride) < 1 or min(self.padding) < 0:
            raise ConfigError(f"géométrie invalide : kernel={self.kernel} stride={self.stride} padding={self.padding}")

    #--------------------------------------------------------------------------------------------------------------#
    # Extents de sortie (T, H, W) pour des extents d'entrée donnés ; erreur si un extent devient nul.              #
    #--------------------------------------------------------------------------------------------------------------#
    def output_extents(self, in_extents) -> tuple:
        if self.transposed:
            out = tuple((i - 1) * s - 2 * p + k
                        for i, k, s, p in zip(in_extents, self.kernel, self.stride, self.padding))
        else:
            out = tuple((i + 2 * p - k) // s + 1
                        for i, k, s, p in zip(in_extents, self.kernel, self.stride, self.padding))
        if len(out) != 3 or min(out) < 1:
            raise DimensionError(f"extents d'entrée {tuple(in_extents)} incompatibles avec {self}")
        return out


def conv_output_extents(in_extents, params: ConvParams) -> tuple:
    return ConvParams(params.num_filters, params.kernel, params.stride, params.padding).output_extents(in_extents)


def deconv_output_extents(in_extents, params: ConvParams) -> tuple:
    return ConvParams(params.num_filters, params.kernel, params.stride, params.padding,
                      transposed=True).output_extents(in_extents)


#--------------------------------------------------------------------------------------------------------------#
# Fenêtres glissantes [N, C, oT, oH, oW, kT, kH, kW] (vues sans copie) d'un tenseur déjà paddé.                #
#--------------------------------------------------------------------------------------------------------------#
def _windows(xp: np.ndarray, kernel: tuple, stride: tuple, out_extents: tuple) -> np.ndarray:
    win = sliding_window_view(xp, kernel, axis=_SPATIAL_AXES)
    (st, sh, sw), (ot, oh, ow) = stride, out_extents
    return win[:, :, :(ot - 1) * st + 1:st, :(oh - 1) * sh + 1:sh, :(ow - 1) * sw + 1:sw]


#--------------------------------------------------------------------------------------------------------------#
# Opération adjointe des fenêtres : accumule des colonnes [N, C, oT, oH, oW, kT, kH, kW] dans un volume.       #
#--------------------------------------------------------------------------------------------------------------#
def _scatter(cols: np.ndarray, kernel: tuple, stride: tuple, target_shape: tuple) -> np.ndarray:
    out = np.zeros(target_shape, dtype=cols.dtype)
    _, _, ot, oh, ow = cols.shape[:5]
    st, sh, sw = stride
    for a in range(kernel[0]):
        for b in range(kernel[1]):
            for c in range(kernel[2]):
                out[:, :, a:a + (ot - 1) * st + 1:st, b:b + (oh - 1) * sh + 1:sh,
                    c:c + (ow - 1) * sw + 1:sw] += cols[..., a, b, c]
    return out


def _check_input(x: Tensor, channels: int, op: str) -> None:
    if x.ndim != 5:
        raise DimensionError(f"{op} attend un tenseur [N, C, T, H, W], reçu {x.shape}")
    if x.shape[1] != channels:
        raise DimensionError(f"{op} : {x.shape[1]} canaux en entrée, {channels} attendus par le noyau")


def _check_weight(weight: Tensor, bias: Tensor, expected_w: tuple, filters: int, op: str) -> None:
    if weight.shape != expected_w:
        raise DimensionError(f"{op} : poids de forme {weight.shape}, {expected_w} attendu")
    if bias.shape != (filters,):
        raise DimensionError(f"{op} : biais de forme {bias.shape}, ({filters},) attendu")


#--------------------------------------------------------------------------------------------------------------#
# Convolution 3D avec padding zéro symétrique ; poids [F, C, kT, kH, kW], biais [F].                           #
#--------------------------------------------------------------------------------------------------------------#
def conv3d(input: Tensor, weight: Tensor, bias: Tensor, params: ConvParams) -> Tensor:
    F = params.num_filters
    C = weight.shape[1] if weight.ndim == 5 else -1
    _check_weight(weight, bias, (F, C) + params.kernel, F, "conv3d")
    _check_input(input, C, "conv3d")

    x, w = input.values, weight.values
    out_ext = conv_output_extents(x.shape[2:], params)
    pt, ph, pw = params.padding
    xp = np.pad(x, ((0, 0), (0, 0), (pt, pt), (ph, ph), (pw, pw)))
    win = _windows(xp, params.kernel, params.stride, out_ext)

    out = np.tensordot(win, w, axes=([1, 5, 6, 7], [1, 2, 3, 4]))
    out = np.ascontiguousarray(np.moveaxis(out, -1, 1)) + bias.values.reshape(1, F, 1, 1, 1)
    T, H, W = x.shape[2:]

    def backward(g):
        gx = gw = gb = None
        if input.requires_grad:
            cols = np.moveaxis(np.tensordot(g, w, axes=([1], [0])), 4, 1)
            gxp = _scatter(cols, params.kernel, params.stride, xp.shape)
            gx = gxp[:, :, pt:pt + T, ph:ph + H, pw:pw + W]
        if weight.requires_grad:
            gw = np.tensordot(g, win, axes=([0, 2, 3, 4], [0, 2, 3, 4]))
        if bias.requires_grad:
            gb = g.sum(axis=_STAT_AXES)
        return gx, gw, gb

    return _result(out, "conv3d", (input, weight, bias), backward)


#--------------------------------------------------------------------------------------------------------------#
# Convolution transposée 3D (adjointe de conv3d) ; poids [C_in, F, kT, kH, kW], biais [F].                     #
#--------------------------------------------------------------------------------------------------------------#
def deconv3d(input: Tensor, weight: Tensor, bias: Tensor, params: ConvParams) -> Tensor:
    F = params.num_filters
    C = weight.shape[0] if weight.ndim == 5 else -1
    _check_weight(weight, bias, (C, F) + params.kernel, F, "deconv3d")
    _check_input(input, C, "deconv3d")

    x, w = input.values, weight.values
    N, _, T, H, W = x.shape
    ot, oh, ow = deconv_output_extents((T, H, W), params)
    kt, kh, kw = params.kernel
    st, sh, sw = params.stride
    pt, ph, pw = params.padding
    full_shape = (N, F, (T - 1) * st + kt, (H - 1) * sh + kh, (W - 1) * sw + kw)

    cols = np.moveaxis(np.tensordot(x, w, axes=([1], [0])), 4, 1)
    full = _scatter(cols, params.kernel, params.stride, full_shape)
    out = full[:, :, pt:pt + ot, ph:ph + oh, pw:pw + ow] + bias.values.reshape(1, F, 1, 1, 1)

    def backward(g):
        gx = gw = gb = None
        if input.requires_grad or weight.requires_grad:
            gfull = np.zeros(full_shape, dtype=g.dtype)
            gfull[:, :, pt:pt + ot, ph:ph + oh, pw:pw + ow] = g
            win = _windows(gfull, params.kernel, params.stride, (T, H, W))
            if input.requires_grad:
                gx = np.moveaxis(np.tensordot(win, w, axes=([1, 5, 6, 7], [1, 2, 3, 4])), -1, 1)
            if weight.requires_grad:
                gw = np.tensordot(x, win, axes=([0, 2, 3, 4], [0, 2, 3, 4]))
        if bias.requires_grad:
            gb = g.sum(axis=_STAT_AXES)
        return gx, gw, gb

    return _result(np.ascontiguousarray(out), "deconv3d", (input, weight, bias), backward)


#--------------------------------------------------------------------------------------------------------------#
# État d'une BatchNorm : gamma/beta apprenables, statistiques glissantes, momentum et epsilon.                 #
#--------------------------------------------------------------------------------------------------------------#
@dataclass
class BatchNormState:
    gamma: Tensor
    beta: Tensor
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = BN_MOMENTUM
    eps: float = BN_EPS

    def __post_init__(self):
        c = self.gamma.shape
        if len(c) != 1 or self.beta.shape != c or self.running_mean.shape != c or self.running_var.shape != c:
            raise DimensionError("gamma, beta et statistiques glissantes doivent avoir une forme [C] commune")
        if not 0.0 < self.momentum < 1.0:
            raise ConfigError(f"momentum BatchNorm hors de ]0, 1[ : {self.momentum}")
        if self.eps <= 0.0:
            raise ConfigError(f"epsilon BatchNorm non positif : {self.eps}")

    @property
    def channels(self) -> int:
        return self.gamma.shape[0]


#--------------------------------------------------------------------------------------------------------------#
# BatchNorm par canal sur (N, T, H, W). Mode "train" : statistiques du lot (variance biaisée) et mise à jour   #
# des moyennes glissantes (variance non biaisée) ; mode "inference" : statistiques glissantes.                 #
#--------------------------------------------------------------------------------------------------------------#
def batchnorm3d(input: Tensor, state: BatchNormState, mode: str = "train", track_running: bool = True) -> Tensor:
    _check_input(input, state.channels, "batchnorm3d")
    x = input.values
    C = state.channels
    n = x.size // C

    if mode == "train":
        if n < 2:
            raise ContractError(f"BatchNorm en entraînement sur {n} valeur(s) par canal : statistiques indéfinies")
        mean = x.mean(axis=_STAT_AXES)
        var = x.var(axis=_STAT_AXES)
        if track_running:
            m = state.momentum
            state.running_mean[...] = (1.0 - m) * state.running_mean + m * mean
            state.running_var[...] = (1.0 - m) * state.running_var + m * var * (n / (n - 1))
    elif mode == "inference":
        mean = state.running_mean.astype(x.dtype)
        var = state.running_var.astype(x.dtype)
    else:
        raise ConfigError(f"mode BatchNorm inconnu : {mode}")

    shape = (1, C, 1, 1, 1)
    inv_std = (1.0 / np.sqrt(var + np.asarray(state.eps, dtype=x.dtype))).reshape(shape)
    xhat = (x - mean.reshape(shape)) * inv_std
    gamma = state.gamma.values.reshape(shape)
    out = gamma * xhat + state.beta.values.reshape(shape)
    training = mode == "train"

    def backward(g):
        gx = None
        if input.requires_grad:
            dxhat = g * gamma
            if training:
                gx = inv_std / n * (n * dxhat - dxhat.sum(axis=_STAT_AXES, keepdims=True)
                                    - xhat * (dxhat * xhat).sum(axis=_STAT_AXES, keepdims=True))
            else:
                gx = dxhat * inv_std
        ggamma = (g * xhat).sum(axis=_STAT_AXES) if state.gamma.requires_grad else None
        gbeta = g.sum(axis=_STAT_AXES) if state.beta.requires_grad else None
        return gx, ggamma, gbeta

    return _result(out, "batchnorm3d", (input, state.gamma, state.beta), backward)


#--------------------------------------------------------------------------------------------------------------#
# Activations : leaky_relu (pente 0.2), relu, tanh et sigmoid (bornées strictement à l'intérieur de leur       #
# image).                                                                                                      #
#--------------------------------------------------------------------------------------------------------------#
def activation(kind: str, input: Tensor) -> Tensor:
    x = input.values
    if kind == "leaky_relu":
        slope = np.where(x > 0, 1.0, LEAKY_RELU_SLOPE).astype(x.dtype)
        return _result(x * slope, kind, (input,), lambda g: (g * slope,))
    if kind == "relu":
        mask = (x > 0).astype(x.dtype)
        return _result(x * mask, kind, (input,), lambda g: (g * mask,))
    if kind == "tanh":
        top = np.nextafter(np.asarray(1.0, dtype=x.dtype), np.asarray(0.0, dtype=x.dtype))
        y = np.clip(np.tanh(x), -top, top)
        return _result(y, kind, (input,), lambda g: (g * (1.0 - y * y),))
    if kind == "sigmoid":
        top = np.nextafter(np.asarray(1.0, dtype=x.dtype), np.asarray(0.0, dtype=x.dtype))
        y = np.clip(expit(x), np.finfo(x.dtype).tiny, top)
        return _result(y, kind, (input,), lambda g: (g * y * (1.0 - y),))
    raise ConfigError(f"activation inconnue : {kind}")


#--------------------------------------------------------------------------------------------------------------#
# Jeu de paramètres nommés d'un réseau (tenseurs apprenables) et tampons non appris (statistiques BatchNorm).  #
#--------------------------------------------------------------------------------------------------------------#
class ParameterSet:

    #--------------------------------------------------------------------------------------------------------------#
    # Initialise le jeu à partir des dictionnaires nom -> Tensor et nom -> tableau.                                #
    #--------------------------------------------------------------------------------------------------------------#
    def __init__(self, tensors: dict, buffers: Optional[dict] = None,
                 bn_momentum: float = BN_MOMENTUM, bn_eps: float = BN_EPS):
        self.tensors = dict(tensors)
        self.buffers = dict(buffers or {})
        self.bn_momentum = bn_momentum
        self.bn_eps = bn_eps

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    def items(self):
        return self.tensors.items()

    #--------------------------------------------------------------------------------------------------------------#
    # Vue BatchNorm d'une couche (gamma, beta et statistiques glissantes partagés, pas copiés).                    #
    #--------------------------------------------------------------------------------------------------------------#
    def bn_state(self, layer: str) -> BatchNormState:
        return BatchNormState(
            gamma=self.tensors[f"{layer}.bn.gamma"],
            beta=self.tensors[f"{layer}.bn.beta"],
            running_mean=self.buffers[f"{layer}.bn.running_mean"],
            running_var=self.buffers[f"{layer}.bn.running_var"],
            momentum=self.bn_momentum,
            eps=self.bn_eps,
        )

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.grad = None

    def set_requires_grad(self, flag: bool) -> None:
        for t in self.tensors.values():
            t.requires_grad = bool(flag)
            t.node = None

    def parameter_count(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    #--------------------------------------------------------------------------------------------------------------#
    # Copie profonde (valeurs et tampons) ; les gradients ne sont pas copiés.                                      #
    #--------------------------------------------------------------------------------------------------------------#
    def clone(self, requires_grad: Optional[bool] = None) -> "ParameterSet":
        tensors = {}
        for name, t in self.tensors.items():
            flag = t.requires_grad if requires_grad is None else requires_grad
            tensors[name] = Tensor(t.values.copy(), requires_grad=flag)
        buffers = {name: b.copy() for name, b in self.buffers.items()}
        return ParameterSet(tensors, buffers, self.bn_momentum, self.bn_eps)

    #--------------------------------------------------------------------------------------------------------------#
    # Aplatit le jeu en tableaux nommés "<prefix>param.<nom>" et "<prefix>buffer.<nom>" (copies).                  #
    #--------------------------------------------------------------------------------------------------------------#
    def to_arrays(self, prefix: str = "") -> dict:
        arrays = {f"{prefix}param.{name}": t.values.copy() for name, t in self.tensors.items()}
        arrays.update({f"{prefix}buffer.{name}": b.copy() for name, b in self.buffers.items()})
        return arrays

    #--------------------------------------------------------------------------------------------------------------#
    # Reconstruit un jeu à partir des tableaux d'un checkpoint (inverse de to_arrays).                             #
    #--------------------------------------------------------------------------------------------------------------#
    @classmethod
    def from_arrays(cls, arrays: dict, prefix: str = "", requires_grad: bool = True,
                    bn_momentum: float = BN_MOMENTUM, bn_eps: float = BN_EPS) -> "ParameterSet":
        tensors, buffers = {}, {}
        p_key, b_key = f"{prefix}param.", f"{prefix}buffer."
        for key, arr in arrays.items():
            if key.startswith(p_key):
                tensors[key[len(p_key):]] = Tensor(np.array(arr, copy=True), requires_grad=requires_grad)
            elif key.startswith(b_key):
                buffers[key[len(b_key):]] = np.array(arr, copy=True)
        return cls(tensors, buffers, bn_momentum, bn_eps)

    def shapes(self) -> dict:
        return {name: t.shape for name, t in self.tensors.items()}


#--------------------------------------------------------------------------------------------------------------#
# Initialise les paramètres d'une NetworkSpec : poids N(0, 0.02), biais 0, gamma N(1, 0.02), beta 0.           #
#--------------------------------------------------------------------------------------------------------------#
def init_parameters(spec, seed: Union[int, np.random.Generator], dtype=np.float32,
                    bn_momentum: float = BN_MOMENTUM, bn_eps: float = BN_EPS) -> ParameterSet:
    rng = np.random.default_rng(seed)
    dtype = np.dtype(dtype)
    tensors, buffers = {}, {}
    for name, shape in spec.parameter_shapes().items():
        kind = name.rsplit(".", 1)[-1]
        if kind == "weight":
            values = rng.normal(0.0, INIT_STD, size=shape)
        elif kind == "gamma":
            values = rng.normal(1.0, INIT_STD, size=shape)
        else:
            values = np.zeros(shape)
        tensors[name] = Tensor(values.astype(dtype), requires_grad=True)
        if kind == "gamma":
            layer = name[:-len(".gamma")]
            buffers[f"{layer}.running_mean"] = np.zeros(shape, dtype=dtype)
            buffers[f"{layer}.running_var"] = np.ones(shape, dtype=dtype)
    return ParameterSet(tensors, buffers, bn_momentum, bn_eps)
