"""Dense tensors with reverse-mode automatic differentiation.

A :class:`Tensor` wraps a numpy array and records, for every derived
value, a closure that routes the output gradient back to its parents.
``backward()`` on a scalar loss walks the recorded graph in reverse
topological order and accumulates gradients into every reachable leaf
with ``requires_grad=True``.

Gradients accumulate across calls; callers zero them explicitly between
optimizer steps.  Arrays keep whatever float precision they were built
with: training code uses float32, gradient checks build float64 graphs.
"""

import numpy as np
from scipy.special import erf

from ..errors import ContractError, DimensionError

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _as_array(value, dtype=None):
    arr = np.asarray(value, dtype=dtype)
    if arr.dtype.kind != "f":
        arr = arr.astype(np.float32)
    return arr


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """n-dimensional float array with an optional gradient accumulator."""

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad=False, dtype=None):
        self.data = _as_array(data, dtype)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._backward = None
        self._parents = ()

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def zeros(shape, dtype=np.float32, requires_grad=False):
        return Tensor(np.zeros(shape, dtype=dtype), requires_grad=requires_grad)

    @staticmethod
    def ones(shape, dtype=np.float32, requires_grad=False):
        return Tensor(np.ones(shape, dtype=dtype), requires_grad=requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data.reshape(-1)[0])

    def detach(self):
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    # -- autograd core --------------------------------------------------------

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self):
        """Accumulate gradients of this scalar into all reachable leaves."""
        if self.size != 1:
            raise ContractError(
                f"backward() needs a scalar loss, got shape {self.shape}"
            )
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operator sugar --------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return getitem(self, key)

    def reshape(self, *shape):
        return reshape(self, *shape)

    def transpose(self, *axes):
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)


def _wrap(value, like=None):
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if isinstance(like, Tensor) else None
    return Tensor(np.asarray(value, dtype=dtype))


def _wrap2(a, b):
    """Wrap both operands, promoting plain scalars to the tensor's dtype."""
    if isinstance(a, Tensor):
        return a, _wrap(b, like=a)
    return _wrap(a, like=b), _wrap(b)


def _make(data, parents, backward):
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


# -- elementwise arithmetic ----------------------------------------------------


def add(a, b):
    a, b = _wrap2(a, b)

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(grad, b.shape))

    return _make(a.data + b.data, (a, b), backward)


def sub(a, b):
    a, b = _wrap2(a, b)

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-grad, b.shape))

    return _make(a.data - b.data, (a, b), backward)


def mul(a, b):
    a, b = _wrap2(a, b)

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(grad * a.data, b.shape))

    return _make(a.data * b.data, (a, b), backward)


def div(a, b):
    a, b = _wrap2(a, b)

    def backward(grad):
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad / b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-grad * a.data / (b.data * b.data), b.shape))

    return _make(a.data / b.data, (a, b), backward)


# -- linear algebra --------------------------------------------------------------


def matmul(a, b):
    """Matrix product over the last two axes; leading axes broadcast."""
    a, b = _wrap(a), _wrap(b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(
            f"matmul needs >=2-d operands, got {a.shape} and {b.shape}"
        )
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(
            f"matmul inner extents differ: {a.shape} x {b.shape}"
        )

    def backward(grad):
        if a.requires_grad:
            ga = np.matmul(grad, np.swapaxes(b.data, -1, -2))
            a._accumulate(_unbroadcast(ga, a.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), grad)
            b._accumulate(_unbroadcast(gb, b.shape))

    return _make(np.matmul(a.data, b.data), (a, b), backward)


# -- shape manipulation ----------------------------------------------------------


def reshape(x, *shape):
    x = _wrap(x)
    if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
        shape = tuple(shape[0])
    old = x.shape

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad.reshape(old))

    return _make(x.data.reshape(shape), (x,), backward)


def transpose(x, axes):
    x = _wrap(x)
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad.transpose(inverse))

    return _make(x.data.transpose(axes), (x,), backward)


def getitem(x, key):
    """Basic indexing (ints and slices); gradient scatters back."""
    x = _wrap(x)

    def backward(grad):
        if x.requires_grad:
            full = np.zeros_like(x.data)
            full[key] += grad
            x._accumulate(full)

    return _make(x.data[key], (x,), backward)


def concat(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(grad):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                index = [slice(None)] * grad.ndim
                index[axis] = slice(lo, hi)
                t._accumulate(grad[tuple(index)])

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)


def roll(x, shifts, axes):
    """Cyclic shift along ``axes``; gradient rolls back the other way."""
    x = _wrap(x)
    shifts = tuple(np.atleast_1d(shifts))
    axes = tuple(np.atleast_1d(axes))

    def backward(grad):
        if x.requires_grad:
            x._accumulate(np.roll(grad, tuple(-s for s in shifts), axes))

    return _make(np.roll(x.data, shifts, axes), (x,), backward)


def pad(x, pad_width):
    """Zero-pad; ``pad_width`` follows numpy's per-axis (before, after) form."""
    x = _wrap(x)
    pad_width = tuple((int(b), int(a)) for b, a in pad_width)
    slices = tuple(
        slice(b, b + n) for (b, _a), n in zip(pad_width, x.shape)
    )

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad[slices])

    return _make(np.pad(x.data, pad_width), (x,), backward)


def gather_rows(x, indices):
    """Select rows of ``x`` along axis 0 by an integer index array."""
    x = _wrap(x)
    indices = np.asarray(indices)

    def backward(grad):
        if x.requires_grad:
            full = np.zeros_like(x.data)
            np.add.at(full, indices, grad)
            x._accumulate(full)

    return _make(x.data[indices], (x,), backward)


# -- reductions --------------------------------------------------------------------


def tsum(x, axis=None, keepdims=False):
    x = _wrap(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(grad):
        if not x.requires_grad:
            return
        g = grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        x._accumulate(np.broadcast_to(g, x.shape).copy())

    return _make(out, (x,), backward)


def tmean(x, axis=None, keepdims=False):
    x = _wrap(x)
    count = x.size if axis is None else np.prod(
        [x.shape[a] for a in np.atleast_1d(axis)]
    )
    out = x.data.mean(axis=axis, keepdims=keepdims)

    def backward(grad):
        if not x.requires_grad:
            return
        g = grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        x._accumulate(np.broadcast_to(g, x.shape) / count)

    return _make(out, (x,), backward)


# -- nonlinearities ------------------------------------------------------------------


def softmax_lastdim(x):
    """Numerically stable softmax over the last axis (max-subtracted)."""
    x = _wrap(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def backward(grad):
        if x.requires_grad:
            dot = (grad * y).sum(axis=-1, keepdims=True)
            x._accumulate((grad - dot) * y)

    return _make(y, (x,), backward)


def layer_norm(x, gamma, beta, eps=1e-5):
    """Normalize the last (feature) axis to zero mean / unit variance, then affine."""
    x, gamma, beta = _wrap(x), _wrap(gamma), _wrap(beta)
    n = x.shape[-1]
    if gamma.shape != (n,) or beta.shape != (n,):
        raise DimensionError(
            f"layer_norm affine extents {gamma.shape}/{beta.shape} do not match features ({n},)"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = gamma.data * xhat + beta.data

    def backward(grad):
        if gamma.requires_grad:
            axes = tuple(range(grad.ndim - 1))
            gamma._accumulate((grad * xhat).sum(axis=axes))
        if beta.requires_grad:
            axes = tuple(range(grad.ndim - 1))
            beta._accumulate(grad.sum(axis=axes))
        if x.requires_grad:
            dxhat = grad * gamma.data
            term = dxhat - dxhat.mean(axis=-1, keepdims=True) \
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            x._accumulate(term * inv)

    return _make(out, (x, gamma, beta), backward)


def gelu(x):
    """Exact Gaussian-CDF GELU, x * Phi(x)."""
    x = _wrap(x)
    phi_cdf = 0.5 * (1.0 + erf(x.data * _INV_SQRT2))
    out = x.data * phi_cdf

    def backward(grad):
        if x.requires_grad:
            density = np.exp(-0.5 * x.data * x.data) * _INV_SQRT2PI
            x._accumulate(grad * (phi_cdf + x.data * density))

    return _make(out.astype(x.data.dtype), (x,), backward)


def sigmoid(x):
    x = _wrap(x)
    y = np.empty_like(x.data)
    pos = x.data >= 0
    y[pos] = 1.0 / (1.0 + np.exp(-x.data[pos]))
    ez = np.exp(x.data[~pos])
    y[~pos] = ez / (1.0 + ez)

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad * y * (1.0 - y))

    return _make(y, (x,), backward)


def tanh(x):
    x = _wrap(x)
    y = np.tanh(x.data)

    def backward(grad):
        if x.requires_grad:
            x._accumulate(grad * (1.0 - y * y))

    return _make(y, (x,), backward)
