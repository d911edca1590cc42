"""Small parameter-container layer on top of the tensor engine."""

import numpy as np

from .tensor import Tensor, matmul


class Module:
    """Base class: collects trainable tensors from attributes, recursively.

    Attributes that are ``Tensor`` with ``requires_grad`` count as
    parameters; attributes that are ``Module`` or lists of modules are
    walked with dotted/indexed names.
    """

    def named_parameters(self, prefix=""):
        out = {}
        for name, value in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                out[key] = value
            elif isinstance(value, Module):
                out.update(value.named_parameters(prefix=f"{key}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(prefix=f"{key}.{i}."))
        return out

    def parameters(self):
        return list(self.named_parameters().values())

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None


class Linear(Module):
    """Affine map ``x @ weight + bias`` acting on the last axis."""

    def __init__(self, in_features, out_features, rng, bias=True, std=0.02,
                 dtype=np.float32):
        self.weight = Tensor(
            rng.normal(0.0, std, size=(in_features, out_features)).astype(dtype),
            requires_grad=True,
        )
        self.bias = None
        if bias:
            self.bias = Tensor(np.zeros(out_features, dtype=dtype), requires_grad=True)

    def __call__(self, x):
        out = matmul(x, self.weight)
        if self.bias is not None:
            out = out + self.bias
        return out


class LayerNorm(Module):
    """Learnable affine layer normalization over the feature axis."""

    def __init__(self, features, eps=1e-5, dtype=np.float32):
        self.gamma = Tensor(np.ones(features, dtype=dtype), requires_grad=True)
        self.beta = Tensor(np.zeros(features, dtype=dtype), requires_grad=True)
        self.eps = eps

    def __call__(self, x):
        from .tensor import layer_norm

        return layer_norm(x, self.gamma, self.beta, eps=self.eps)
