################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_tensor.py                                                                               #
# Date de modification : 19.10.2026                                                                            #
# Description : Cœur autodiff : valeurs et gradients des opérations, accumulation, no_grad et erreurs de       #
# contrat.                                                                                                     #
################################################################################################################

import numpy as np
import pytest

from mdgan.errors import ContractError, DimensionError, DomainError
from mdgan.grad_check import grad_check
from mdgan.tensor import (Tensor, abs_, clamp, exp, log, matmul_batched, no_grad, reduce, repeat_axis, reshape,
                          softplus, transpose)


def test_integer_input_becomes_float64():
    assert Tensor([1, 2, 3]).dtype == np.float64
    assert Tensor(np.zeros(2, dtype=np.float32)).dtype == np.float32
    assert Tensor(np.zeros(2, dtype=np.uint8)).dtype == np.uint8


def test_add_mul_gradients():
    a = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    b = Tensor([4.0, 5.0, 6.0], requires_grad=True)
    (a * b + a).sum().backward()
    np.testing.assert_array_equal(a.grad, [5.0, 6.0, 7.0])
    np.testing.assert_array_equal(b.grad, [1.0, 2.0, 3.0])


def test_reused_leaf_accumulates():
    x = Tensor([3.0, -2.0], requires_grad=True)
    (x * x).sum().backward()
    np.testing.assert_array_equal(x.grad, [6.0, -4.0])


def test_scalar_operand_broadcasts_and_reduces_gradient():
    x = Tensor(np.ones((2, 3)), requires_grad=True)
    s = Tensor([2.0], requires_grad=True)
    (x * s).sum().backward()
    np.testing.assert_array_equal(x.grad, np.full((2, 3), 2.0))
    np.testing.assert_array_equal(s.grad, [6.0])


def test_shape_mismatch_rejected():
    with pytest.raises(DimensionError):
        Tensor(np.ones(3)) + Tensor(np.ones(4))


def test_log_of_non_positive_is_domain_error():
    with pytest.raises(DomainError):
        log(Tensor([1.0, 0.0]))


def test_backward_needs_scalar_root():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ContractError):
        (x * 2.0).backward()


def test_backward_without_graph():
    with pytest.raises(ContractError):
        Tensor(1.0).backward()


def test_second_backward_on_consumed_graph():
    x = Tensor(np.ones(3), requires_grad=True)
    y = (x * 2.0).sum()
    y.backward()
    with pytest.raises(ContractError):
        y.backward()
    # Les gradients ne sont pas accumulés une seconde fois
    np.testing.assert_array_equal(x.grad, np.full(3, 2.0))
    (x * 2.0).sum().backward()
    np.testing.assert_array_equal(x.grad, np.full(3, 4.0))


def test_no_grad_records_nothing():
    x = Tensor(np.ones(3), requires_grad=True)
    with no_grad():
        y = (x * 3.0).sum()
    assert y.node is None
    assert not y.requires_grad


def test_mean_gradient_and_bad_axis():
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    m = x.mean(axes=1)
    np.testing.assert_allclose(m.values, [1.0, 4.0])
    m.sum().backward()
    np.testing.assert_allclose(x.grad, np.full((2, 3), 1.0 / 3.0))
    with pytest.raises(DimensionError):
        reduce("sum", x, axes=2)


def test_abs_subgradient_is_zero_at_zero():
    x = Tensor([-2.0, 0.0, 3.0], requires_grad=True)
    abs_(x).sum().backward()
    np.testing.assert_array_equal(x.grad, [-1.0, 0.0, 1.0])


def test_softplus_is_stable_for_large_inputs():
    x = Tensor([-800.0, 0.0, 800.0], requires_grad=True)
    y = softplus(x)
    assert np.all(np.isfinite(y.values))
    np.testing.assert_allclose(y.values, [0.0, np.log(2.0), 800.0])
    y.sum().backward()
    np.testing.assert_allclose(x.grad, [0.0, 0.5, 1.0])


def test_clamp_blocks_gradient_outside_range():
    x = Tensor([-2.0, 0.5, 2.0], requires_grad=True)
    clamp(x, -1.0, 1.0).sum().backward()
    np.testing.assert_array_equal(x.grad, [0.0, 1.0, 0.0])


def test_repeat_axis_sums_gradient():
    x = Tensor(np.ones((2, 3)), requires_grad=True)
    y = repeat_axis(x, 1, 4)
    assert y.shape == (2, 4, 3)
    y.sum().backward()
    np.testing.assert_array_equal(x.grad, np.full((2, 3), 4.0))
    with pytest.raises(ContractError):
        repeat_axis(x, 0, 0)


def test_reshape_count_mismatch():
    with pytest.raises(DimensionError):
        reshape(Tensor(np.ones(6)), (4, 2))


def test_composite_gradients_match_finite_differences(rng):
    b = Tensor(rng.normal(size=(2, 4, 3)))

    def f(x):
        y = matmul_batched(transpose(reshape(x, (2, 3, 4)), (0, 2, 1)), transpose(b, (0, 2, 1)))
        return (exp(y * 0.1) + softplus(y)).mean()

    assert grad_check(f, Tensor(rng.normal(size=(24,)))) < 1e-6



def test_matmul_batched_matches_triple_loop(rng):
    a = rng.normal(size=(2, 3, 4))
    b = rng.normal(size=(2, 4, 3))
    expected = np.zeros((2, 3, 3))
    for n in range(2):
        for i in range(3):
            for j in range(3):
                expected[n, i, j] = sum(a[n, i, k] * b[n, k, j] for k in range(4))
    np.testing.assert_allclose(matmul_batched(Tensor(a), Tensor(b)).values, expected, rtol=0, atol=1e-10)


def test_matmul_batched_gradients_of_both_operands(rng):
    a = Tensor(rng.normal(size=(1, 3, 4)))
    b = Tensor(rng.normal(size=(1, 4, 3)))
    weights = Tensor(rng.normal(size=(1, 3, 3)))
    assert grad_check(lambda x: (matmul_batched(x, b) * weights).sum(), a) < 1e-6
    assert grad_check(lambda x: (matmul_batched(a, x) * weights).sum(), b) < 1e-6

    with pytest.raises(DimensionError):
        matmul_batched(Tensor(np.ones((1, 3, 4))), Tensor(np.ones((1, 3, 4))))

def test_item_requires_single_element():
    assert Tensor([[2.5]]).item() == 2.5
    with pytest.raises(ContractError):
        Tensor([1.0, 2.0]).item()
