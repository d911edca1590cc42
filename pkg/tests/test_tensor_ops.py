import math

import numpy as np
import pytest

from lakedyn.autodiff import (
    Tensor,
    concat,
    gather_rows,
    gelu,
    layer_norm,
    matmul,
    pad,
    roll,
    sigmoid,
    softmax_lastdim,
    tanh,
)
from lakedyn.errors import ContractError, DimensionError


def test_matmul_identity():
    eye = Tensor(np.eye(2))
    m = Tensor([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(matmul(eye, m).data, m.data)


def test_matmul_orthogonal_rows():
    a = Tensor([[1.0, 0.0]])
    b = Tensor([[0.0], [5.0]])
    assert matmul(a, b).data == np.array([[0.0]])


def test_matmul_against_triple_loop():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((3, 4))
    b = rng.standard_normal((4, 2))
    out = matmul(Tensor(a), Tensor(b)).data
    expected = np.zeros((3, 2))
    for i in range(3):
        for j in range(2):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]
    assert np.max(np.abs(out - expected)) < 1e-12


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError) as err:
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 2))))
    assert "(2, 3)" in str(err.value) and "(4, 2)" in str(err.value)


def test_softmax_symmetry():
    assert np.allclose(softmax_lastdim(Tensor([0.0, 0.0])).data, [0.5, 0.5])


def test_softmax_ln2():
    out = softmax_lastdim(Tensor([math.log(2.0), 0.0], dtype=np.float64)).data
    assert np.allclose(out, [2.0 / 3.0, 1.0 / 3.0], atol=1e-12)


def test_softmax_no_overflow():
    out = softmax_lastdim(Tensor([1000.0, 0.0])).data
    assert np.all(np.isfinite(out))
    assert np.allclose(out, [1.0, 0.0])


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(0)
    for seed in range(20):
        x = Tensor(np.random.default_rng(seed).standard_normal((4, 6)) * 10)
        rows = softmax_lastdim(x).data.sum(axis=-1)
        assert np.max(np.abs(rows - 1.0)) < 1e-6
    assert rng is not None


def test_layer_norm_constant_row_is_zero():
    x = Tensor(np.full((3, 5), 2.5))
    out = layer_norm(x, Tensor(np.ones(5)), Tensor(np.zeros(5))).data
    assert np.allclose(out, 0.0)


def test_layer_norm_two_points():
    out = layer_norm(
        Tensor([[1.0, 3.0]], dtype=np.float64),
        Tensor(np.ones(2)),
        Tensor(np.zeros(2)),
    ).data
    assert np.allclose(out, [[-1.0, 1.0]], atol=1e-4)


def test_layer_norm_gamma_zero_broadcasts_beta():
    rng = np.random.default_rng(1)
    x = Tensor(rng.standard_normal((2, 4)))
    beta = np.array([1.0, 2.0, 3.0, 4.0])
    out = layer_norm(x, Tensor(np.zeros(4)), Tensor(beta)).data
    assert np.allclose(out, np.broadcast_to(beta, (2, 4)))


def test_layer_norm_moments_property():
    for seed in range(20):
        x = Tensor(np.random.default_rng(seed).standard_normal((3, 8)) * 5 + 1)
        out = layer_norm(x, Tensor(np.ones(8)), Tensor(np.zeros(8))).data
        assert np.max(np.abs(out.mean(axis=-1))) < 1e-6
        assert np.max(np.abs(out.var(axis=-1) - 1.0)) < 1e-4


def test_layer_norm_feature_mismatch():
    with pytest.raises(DimensionError):
        layer_norm(Tensor(np.zeros((2, 4))), Tensor(np.ones(3)), Tensor(np.zeros(3)))


def test_activations_at_zero():
    assert gelu(Tensor([0.0])).data == 0.0
    assert sigmoid(Tensor([0.0])).data == 0.5
    assert tanh(Tensor([0.0])).data == 0.0


def test_gelu_at_three():
    # x * Phi(x) evaluated via erf: 3 * 0.5 * (1 + erf(3/sqrt(2)))
    expected = 3.0 * 0.5 * (1.0 + math.erf(3.0 / math.sqrt(2.0)))
    out = float(gelu(Tensor([3.0], dtype=np.float64)).data)
    assert abs(out - expected) < 1e-12
    assert abs(out - 2.9960) < 1e-4


def test_sigmoid_symmetry_identity():
    x = np.linspace(-8, 8, 33)
    left = sigmoid(Tensor(-x, dtype=np.float64)).data
    right = 1.0 - sigmoid(Tensor(x, dtype=np.float64)).data
    assert np.max(np.abs(left - right)) < 1e-12


def test_backward_sum_gives_ones():
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    x.sum().backward()
    assert np.array_equal(x.grad, np.ones((2, 3)))


def test_backward_quadratic():
    x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
    (x * x).sum().backward()
    assert np.allclose(x.grad, 2 * x.data)


def test_backward_requires_scalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ContractError):
        (x * 2).backward()


def test_backward_accumulates_until_zeroed():
    x = Tensor(np.ones(2), requires_grad=True)
    x.sum().backward()
    x.sum().backward()
    assert np.allclose(x.grad, [2.0, 2.0])
    x.zero_grad()
    assert x.grad is None


def test_roll_pad_concat_gather_round_trips():
    rng = np.random.default_rng(3)
    x = Tensor(rng.standard_normal((4, 5)), requires_grad=True)
    rolled = roll(x, (1, -2), (0, 1))
    assert np.allclose(rolled.data, np.roll(x.data, (1, -2), (0, 1)))
    padded = pad(x, ((1, 2), (0, 3)))
    assert padded.shape == (7, 8)
    both = concat([x, x], axis=1)
    assert both.shape == (4, 10)
    picked = gather_rows(x, np.array([0, 0, 3]))
    picked.sum().backward()
    assert x.grad[0].sum() == pytest.approx(2 * 5)


def test_getitem_strided_gradient():
    x = Tensor(np.arange(16.0).reshape(4, 4), requires_grad=True)
    x[0::2, 1::2].sum().backward()
    expected = np.zeros((4, 4))
    expected[0::2, 1::2] = 1.0
    assert np.array_equal(x.grad, expected)
