import numpy as np
import pytest

from lakedyn.autodiff import Adam, PlateauScheduler, Tensor


def test_adam_first_step_is_signed_lr():
    # bias correction makes step one equal -lr * g / (|g| + eps)
    p = Tensor(np.array([1.0, -1.0, 2.0]), requires_grad=True)
    p.grad = np.array([0.5, -3.0, 1e-3])
    opt = Adam([p], lr=0.01)
    before = p.data.copy()
    opt.step()
    expected = before - 0.01 * p.grad / (np.abs(p.grad) + opt.eps)
    assert np.allclose(p.data, expected, atol=1e-9)
    assert np.allclose(p.data, before - 0.01 * np.sign(p.grad), atol=1e-4)


def test_adam_zero_gradient_is_identity():
    p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    p.grad = np.zeros(2)
    opt = Adam([p], lr=0.1)
    before = p.data.copy()
    for _ in range(5):
        opt.step()
    assert np.array_equal(p.data, before)


def test_adam_constant_gradient_moves_monotonically():
    # hand simulation: with g constant, every update moves against sign(g)
    p = Tensor(np.array([0.0]), requires_grad=True)
    opt = Adam([p], lr=0.05)
    values = [float(p.data[0])]
    for _ in range(10):
        p.grad = np.array([2.0])
        opt.step()
        values.append(float(p.data[0]))
    diffs = np.diff(values)
    assert np.all(diffs < 0)


def test_adam_step_counter():
    p = Tensor(np.zeros(1), requires_grad=True)
    opt = Adam([p])
    for expected in range(1, 4):
        p.grad = np.ones(1)
        opt.step()
        assert opt.t == expected


class _FakeOpt:
    def __init__(self, lr):
        self.lr = lr


def test_scheduler_decays_after_six_stagnant_epochs():
    opt = _FakeOpt(0.005)
    sched = PlateauScheduler(opt, patience=6, factor=0.33)
    sched.epoch_end(0.5)
    for _ in range(5):
        assert sched.epoch_end(0.5) == pytest.approx(0.005)
    assert sched.epoch_end(0.5) == pytest.approx(0.005 * 0.33)
    assert opt.lr == pytest.approx(0.00165)


def test_scheduler_constant_under_improvement():
    opt = _FakeOpt(0.005)
    sched = PlateauScheduler(opt, patience=6, factor=0.33)
    for epoch in range(20):
        sched.epoch_end(0.1 + 0.01 * epoch)
    assert opt.lr == 0.005


def test_scheduler_counter_resets_on_improvement():
    opt = _FakeOpt(0.005)
    sched = PlateauScheduler(opt, patience=6, factor=0.33)
    sched.epoch_end(0.5)
    for _ in range(5):
        sched.epoch_end(0.4)
    sched.epoch_end(0.6)  # improvement on the sixth: counter resets
    assert opt.lr == 0.005
    assert sched.epochs_since_improvement == 0


def test_scheduler_lr_is_initial_times_factor_powers():
    opt = _FakeOpt(0.005)
    sched = PlateauScheduler(opt, patience=2, factor=0.33)
    history = []
    sched.epoch_end(1.0)
    for _ in range(10):
        history.append(sched.epoch_end(0.0))
    assert all(b <= a for a, b in zip(history, history[1:]))
    decays = sum(1 for a, b in zip([0.005] + history, history) if b < a)
    assert history[-1] == pytest.approx(0.005 * 0.33 ** decays)
