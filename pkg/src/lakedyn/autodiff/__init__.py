from .tensor import (
    Tensor,
    add,
    concat,
    div,
    gather_rows,
    gelu,
    getitem,
    layer_norm,
    matmul,
    mul,
    pad,
    reshape,
    roll,
    sigmoid,
    softmax_lastdim,
    sub,
    tanh,
    tmean,
    transpose,
    tsum,
)
from .nn import LayerNorm, Linear, Module
from .optim import Adam, PlateauScheduler
from .checkpoint import load_checkpoint, load_into, save_checkpoint

__all__ = [
    "Tensor", "add", "sub", "mul", "div", "matmul", "reshape", "transpose",
    "getitem", "concat", "roll", "pad", "gather_rows", "tsum", "tmean",
    "softmax_lastdim", "layer_norm", "gelu", "sigmoid", "tanh",
    "Module", "Linear", "LayerNorm", "Adam", "PlateauScheduler",
    "save_checkpoint", "load_checkpoint", "load_into",
]
