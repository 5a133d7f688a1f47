################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_grad_check.py                                                                           #
# Date de modification : 19.10.2026                                                                            #
# Description : Banc de différences finies : accepte un gradient juste, détecte un gradient faux.              #
################################################################################################################

import numpy as np
import pytest

from mdgan.errors import ContractError
from mdgan.grad_check import grad_check
from mdgan.tensor import Tensor, _result, exp


def _wrong_square(x: Tensor) -> Tensor:
    # Gradient volontairement faux : x au lieu de 2x
    v = x.values
    return _result(v * v, "wrong-square", (x,), lambda g: (g * v,))


def test_correct_gradient_passes(rng):
    x = Tensor(rng.normal(size=(5,)))
    assert grad_check(lambda t: (exp(t) * t).sum(), x) < 1e-7


def test_wrong_gradient_is_detected(rng):
    x = Tensor(rng.uniform(0.5, 1.5, size=(4,)))
    assert grad_check(lambda t: _wrong_square(t).sum(), x) > 0.4


def test_sampled_coordinates(rng):
    x = Tensor(rng.normal(size=(200,)))
    assert grad_check(lambda t: (t * t).sum(), x, samples=10, seed=5) < 1e-7


def test_input_left_untouched(rng):
    values = rng.normal(size=(3,))
    x = Tensor(values.copy())
    grad_check(lambda t: (t * t).sum(), x)
    np.testing.assert_array_equal(x.values, values)


def test_non_scalar_output_rejected():
    with pytest.raises(ContractError):
        grad_check(lambda t: t * 2.0, Tensor(np.ones(3)))


def test_non_positive_step_rejected():
    with pytest.raises(ContractError):
        grad_check(lambda t: t.sum(), Tensor(np.ones(3)), step=0.0)


def test_small_gradients_are_compared_on_absolute_scale(rng):
    x = Tensor(rng.uniform(0.5, 1.5, size=(4,)) * 1e-5)
    # Sous le plancher min_scale, l'écart est rapporté en absolu
    assert grad_check(lambda t: _wrong_square(t).sum(), x) < 0.02
    assert grad_check(lambda t: _wrong_square(t).sum(), x, min_scale=1e-12) > 0.4
