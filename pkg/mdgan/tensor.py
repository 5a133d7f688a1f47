################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : mdgan/tensor.py                                                                                    #
# Date de modification : 19.10.2026                                                                            #
# Description : Tenseur dense N-dimensionnel et différentiation automatique en mode inverse sur un graphe      #
# dynamique.                                                                                                   #
################################################################################################################

import threading
from contextlib import contextmanager
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from mdgan.errors import ContractError, DimensionError, DomainError

Number = Union[int, float]

_FLOAT_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))
_BINARY_KINDS = ("add", "sub", "mul")
_SCALAR_KINDS = ("scalar-mul", "scalar-div")
_UNARY_KINDS = ("neg", "exp", "log", "abs")

# Le ruban est propre au thread d'entraînement
_grad_mode = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_grad_mode, "enabled", True)


#--------------------------------------------------------------------------------------------------------------#
# Désactive l'enregistrement du graphe dans le thread courant (réseaux figés, inférence, différences finies).  #
#--------------------------------------------------------------------------------------------------------------#
@contextmanager
def no_grad():
    previous = is_grad_enabled()
    _grad_mode.enabled = False
    try:
        yield
    finally:
        _grad_mode.enabled = previous


#--------------------------------------------------------------------------------------------------------------#
# Noeud du graphe : type d'opération, tenseurs d'entrée et règle de rétropropagation (contexte capturé).       #
#--------------------------------------------------------------------------------------------------------------#
class GraphNode:
    __slots__ = ("op", "inputs", "backward_fn", "consumed")

    def __init__(self, op: str, inputs: tuple, backward_fn: Callable):
        self.op = op
        self.inputs = inputs
        self.backward_fn = backward_fn
        self.consumed = False

    def __repr__(self) -> str:
        return f"GraphNode({self.op}, {len(self.inputs)} entrées)"


#--------------------------------------------------------------------------------------------------------------#
# Tenseur : valeurs numpy (ordre C), drapeau requires_grad, gradient accumulé et noeud producteur.             #
#--------------------------------------------------------------------------------------------------------------#
class Tensor:
    __slots__ = ("values", "requires_grad", "grad", "node")

    def __init__(self, values, requires_grad: bool = False, dtype=None):
        arr = np.asarray(values, dtype=dtype)
        if dtype is None and arr.dtype not in _FLOAT_DTYPES and arr.dtype != np.uint8:
            arr = arr.astype(np.float64)
        if requires_grad and arr.dtype not in _FLOAT_DTYPES:
            raise ContractError(f"seuls les tenseurs flottants sont différentiables (dtype {arr.dtype})")
        self.values = arr
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.node: Optional[GraphNode] = None

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    def item(self) -> float:
        if self.values.size != 1:
            raise ContractError(f"item() exige un seul élément, forme {self.shape}")
        return float(self.values.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.values

    def detach(self) -> "Tensor":
        return Tensor(self.values)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        flag = ", requires_grad" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    #--------------------------------------------------------------------------------------------------------------#
    # Rétropropage depuis une racine scalaire ; les gradients des feuilles s'accumulent (plusieurs usages =        #
    # somme).                                                                                                      #
    #--------------------------------------------------------------------------------------------------------------#
    def backward(self) -> None:
        if self.values.size != 1:
            raise ContractError(f"backward exige une racine scalaire, forme reçue {self.shape}")
        if not self.requires_grad:
            raise ContractError("aucun graphe enregistré depuis cette racine")

        order = _topological_order(self)
        if any(t.node is not None and t.node.consumed for t in order):
            raise ContractError("graphe déjà parcouru par un backward précédent")
        grads = {id(self): np.ones_like(self.values)}
        for t in reversed(order):
            g = grads.pop(id(t), None)
            if g is None:
                continue
            if t.node is None:
                g = np.array(g, dtype=t.values.dtype)
                t.grad = g if t.grad is None else t.grad + g
                continue
            for inp, ig in zip(t.node.inputs, t.node.backward_fn(g)):
                if ig is None or not inp.requires_grad:
                    continue
                key = id(inp)
                grads[key] = grads[key] + ig if key in grads else ig

        # Graphe libéré : un second backward est refusé
        for t in order:
            if t.node is not None:
                t.node.consumed = True
                t.node.backward_fn = None

    # Opérateurs
    def __add__(self, other):
        return elementwise("add", self, other)

    def __radd__(self, other):
        return elementwise("add", other, self)

    def __sub__(self, other):
        return elementwise("sub", self, other)

    def __rsub__(self, other):
        return elementwise("sub", other, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return elementwise("scalar-mul", self, other)
        return elementwise("mul", self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, (int, float)):
            raise ContractError("division uniquement par une constante scalaire")
        return elementwise("scalar-div", self, other)

    def __neg__(self):
        return elementwise("neg", self)

    def sum(self, axes=None) -> "Tensor":
        return reduce("sum", self, axes)

    def mean(self, axes=None) -> "Tensor":
        return reduce("mean", self, axes)


#--------------------------------------------------------------------------------------------------------------#
# Ordre topologique (parcours en profondeur itératif) des tenseurs dépendant de la racine.                     #
#--------------------------------------------------------------------------------------------------------------#
def _topological_order(root: Tensor) -> list:
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        t, expanded = stack.pop()
        if expanded:
            order.append(t)
            continue
        if id(t) in visited:
            continue
        visited.add(id(t))
        stack.append((t, True))
        if t.node is not None:
            for inp in t.node.inputs:
                if inp.requires_grad and id(inp) not in visited:
                    stack.append((inp, False))
    return order


#--------------------------------------------------------------------------------------------------------------#
# Construit le tenseur résultat et n'enregistre le noeud que si une entrée exige un gradient.                  #
#--------------------------------------------------------------------------------------------------------------#
def _result(values, op: str, inputs: Sequence[Tensor], backward_fn: Callable) -> Tensor:
    out = Tensor(np.asarray(values))
    if is_grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.node = GraphNode(op, tuple(inputs), backward_fn)
    return out


def as_tensor(x, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(x, dtype=dtype))


def _broadcast_pair(a: Tensor, b: Tensor) -> tuple:
    if a.shape == b.shape:
        return a.values, b.values
    # Seul un opérande à un élément peut être diffusé
    if b.size == 1:
        return a.values, b.values.reshape(())
    if a.size == 1:
        return a.values.reshape(()), b.values
    raise DimensionError(f"formes incompatibles {a.shape} et {b.shape}")


def _reduce_to(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    return np.asarray(g.sum()).reshape(shape)


#--------------------------------------------------------------------------------------------------------------#
# Opérations élément par élément : add, sub, mul, scalar-mul, scalar-div, neg, exp, log, abs.                  #
#--------------------------------------------------------------------------------------------------------------#
def elementwise(kind: str, a, b=None) -> Tensor:
    if kind in _BINARY_KINDS:
        if b is None:
            raise ContractError(f"{kind} exige deux opérandes")
        ref = a if isinstance(a, Tensor) else b if isinstance(b, Tensor) else None
        a, b = as_tensor(a, ref), as_tensor(b, ref)
        av, bv = _broadcast_pair(a, b)
        a_shape, b_shape = a.shape, b.shape

        if kind == "add":
            values = av + bv

            def backward(g):
                return _reduce_to(g, a_shape), _reduce_to(g, b_shape)
        elif kind == "sub":
            values = av - bv

            def backward(g):
                return _reduce_to(g, a_shape), _reduce_to(-g, b_shape)
        else:
            values = av * bv

            def backward(g):
                return _reduce_to(g * bv, a_shape), _reduce_to(g * av, b_shape)

        return _result(values, kind, (a, b), backward)

    a = as_tensor(a)
    x = a.values

    if kind in _SCALAR_KINDS:
        if not isinstance(b, (int, float)):
            raise ContractError(f"{kind} exige une constante scalaire")
        c = np.asarray(b, dtype=x.dtype)
        if kind == "scalar-mul":
            return _result(x * c, kind, (a,), lambda g: (g * c,))
        return _result(x / c, kind, (a,), lambda g: (g / c,))

    if kind == "neg":
        return _result(-x, kind, (a,), lambda g: (-g,))
    if kind == "exp":
        values = np.exp(x)
        return _result(values, kind, (a,), lambda g: (g * values,))
    if kind == "log":
        if np.any(x <= 0):
            raise DomainError("log d'une valeur non strictement positive")
        return _result(np.log(x), kind, (a,), lambda g: (g / x,))
    if kind == "abs":
        # Sous-gradient nul en 0
        return _result(np.abs(x), kind, (a,), lambda g: (g * np.sign(x),))

    raise ContractError(f"opération élément par élément inconnue : {kind}")


def add(a, b) -> Tensor:
    return elementwise("add", a, b)


def sub(a, b) -> Tensor:
    return elementwise("sub", a, b)


def mul(a, b) -> Tensor:
    return elementwise("mul", a, b)


def scalar_mul(a, c: Number) -> Tensor:
    return elementwise("scalar-mul", a, c)


def neg(a) -> Tensor:
    return elementwise("neg", a)


def exp(a) -> Tensor:
    return elementwise("exp", a)


def log(a) -> Tensor:
    return elementwise("log", a)


def abs_(a) -> Tensor:
    return elementwise("abs", a)


#--------------------------------------------------------------------------------------------------------------#
# log(1 + e^x) sous forme stable (logaddexp) ; dérivée = sigmoid(x).                                           #
#--------------------------------------------------------------------------------------------------------------#
def softplus(a) -> Tensor:
    a = as_tensor(a)
    x = a.values
    return _result(np.logaddexp(0, x), "softplus", (a,), lambda g: (g * expit(x),))


#--------------------------------------------------------------------------------------------------------------#
# Borne les valeurs dans [low, high] ; le gradient ne passe qu'à l'intérieur de l'intervalle.                  #
#--------------------------------------------------------------------------------------------------------------#
def clamp(a, low: Number, high: Number) -> Tensor:
    a = as_tensor(a)
    x = a.values
    mask = (x >= low) & (x <= high)
    return _result(np.clip(x, low, high), "clamp", (a,), lambda g: (g * mask,))


def _normalize_axes(axes, ndim: int) -> tuple:
    if axes is None:
        return tuple(range(ndim))
    if isinstance(axes, (int, np.integer)):
        axes = (int(axes),)
    out = []
    for ax in axes:
        if not isinstance(ax, (int, np.integer)) or not -ndim <= ax < ndim:
            raise DimensionError(f"axe {ax} invalide pour un tenseur de rang {ndim}")
        out.append(int(ax) % ndim)
    if len(set(out)) != len(out):
        raise DimensionError(f"axes répétés : {axes}")
    return tuple(sorted(out))


#--------------------------------------------------------------------------------------------------------------#
# Réductions sum / mean ; la rétropropagation diffuse le gradient amont sur les axes réduits.                  #
#--------------------------------------------------------------------------------------------------------------#
def reduce(kind: str, a, axes=None) -> Tensor:
    a = as_tensor(a)
    axes_t = _normalize_axes(axes, a.ndim)
    in_shape = a.shape
    count = int(np.prod([in_shape[ax] for ax in axes_t])) if axes_t else 1

    if kind == "sum":
        values = np.sum(a.values, axis=axes_t)
        scale = None
    elif kind == "mean":
        values = np.sum(a.values, axis=axes_t) / np.asarray(count, dtype=a.dtype)
        scale = np.asarray(count, dtype=a.dtype)
    else:
        raise ContractError(f"réduction inconnue : {kind}")

    def backward(g):
        g = np.broadcast_to(np.expand_dims(g, axes_t), in_shape)
        return (g / scale if scale is not None else np.array(g),)

    return _result(values, kind, (a,), backward)


def reshape(a, new_shape: Iterable[int]) -> Tensor:
    a = as_tensor(a)
    new_shape = tuple(int(d) for d in new_shape)
    if any(d < 1 for d in new_shape) or int(np.prod(new_shape)) != a.size:
        raise DimensionError(f"reshape {a.shape} -> {new_shape} : nombre d'éléments différent")
    old_shape = a.shape
    return _result(a.values.reshape(new_shape), "reshape", (a,), lambda g: (g.reshape(old_shape),))


def transpose(a, axes: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    axes = tuple(int(ax) for ax in axes)
    if sorted(axes) != list(range(a.ndim)):
        raise DimensionError(f"permutation {axes} invalide pour le rang {a.ndim}")
    inverse = tuple(np.argsort(axes))
    return _result(np.transpose(a.values, axes), "transpose", (a,), lambda g: (np.transpose(g, inverse),))


#--------------------------------------------------------------------------------------------------------------#
# Insère un axe à la position donnée et y répète le tenseur count fois (gradient : somme sur cet axe).         #
#--------------------------------------------------------------------------------------------------------------#
def repeat_axis(a, axis: int, count: int) -> Tensor:
    a = as_tensor(a)
    if count < 1:
        raise ContractError(f"nombre de répétitions invalide : {count}")
    if not 0 <= axis <= a.ndim:
        raise DimensionError(f"axe d'insertion {axis} invalide pour le rang {a.ndim}")
    values = np.repeat(np.expand_dims(a.values, axis), count, axis=axis)
    return _result(values, "repeat", (a,), lambda g: (g.sum(axis=axis),))


#--------------------------------------------------------------------------------------------------------------#
# Produit matriciel par lot [N,M,S] x [N,S,K] -> [N,M,K].                                                      #
#--------------------------------------------------------------------------------------------------------------#
def matmul_batched(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 3 or b.ndim != 3:
        raise DimensionError(f"matmul_batched attend deux tenseurs de rang 3, reçu {a.shape} et {b.shape}")
    if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[1]:
        raise DimensionError(f"dimensions incompatibles {a.shape} x {b.shape}")
    av, bv = a.values, b.values

    def backward(g):
        return np.matmul(g, np.swapaxes(bv, 1, 2)), np.matmul(np.swapaxes(av, 1, 2), g)

    return _result(np.matmul(av, bv), "matmul_batched", (a, b), backward)
