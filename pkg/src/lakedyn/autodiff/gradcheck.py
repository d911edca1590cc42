"""Central finite-difference verification of analytic gradients.

Builds the loss twice per perturbed element at 64-bit precision and
compares the recorded gradient against (f(x+h) - f(x-h)) / 2h.  Used by
the test suite for every differentiable operation.
"""

import numpy as np

from .tensor import Tensor


def finite_difference_grad(loss_fn, tensors, index, h=1e-5):
    """Central difference of ``loss_fn()`` w.r.t. element ``index`` of ``tensors[i]``."""
    tensor_i, flat_i = index
    target = tensors[tensor_i]
    original = target.data.reshape(-1)[flat_i]
    target.data.reshape(-1)[flat_i] = original + h
    up = float(loss_fn().data)
    target.data.reshape(-1)[flat_i] = original - h
    down = float(loss_fn().data)
    target.data.reshape(-1)[flat_i] = original
    return (up - down) / (2.0 * h)


def check_gradients(loss_fn, tensors, rtol=1e-4, h=1e-5, max_elems=None, rng=None):
    """Compare analytic grads of ``loss_fn`` against central differences.

    ``tensors`` are the float64 leaves to check (requires_grad must be
    set).  Returns the worst relative error; raises AssertionError when
    any element exceeds ``rtol`` under the mixed criterion
    |a - f| <= rtol * max(1, |a|, |f|).
    """
    for t in tensors:
        assert t.data.dtype == np.float64, "gradient checks run at 64-bit"
        t.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [
        t.grad.copy() if t.grad is not None else np.zeros_like(t.data)
        for t in tensors
    ]
    worst = 0.0
    for i, t in enumerate(tensors):
        n = t.data.size
        picks = range(n)
        if max_elems is not None and n > max_elems:
            rng = rng or np.random.default_rng(0)
            picks = rng.choice(n, size=max_elems, replace=False)
        for j in picks:
            fd = finite_difference_grad(loss_fn, tensors, (i, j), h=h)
            a = analytic[i].reshape(-1)[j]
            err = abs(a - fd) / max(1.0, abs(a), abs(fd))
            worst = max(worst, err)
            assert err <= rtol, (
                f"gradient mismatch on tensor {i} elem {j}: "
                f"analytic={a:.10g} fd={fd:.10g} rel={err:.3g}"
            )
    return worst


def leaf(rng, *shape, scale=1.0):
    """Convenience: a float64 requires-grad leaf with standard-normal entries."""
    return Tensor(rng.standard_normal(shape) * scale, requires_grad=True, dtype=np.float64)
