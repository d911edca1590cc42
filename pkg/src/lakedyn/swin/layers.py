"""Building blocks: windowed multi-head attention with relative position
bias, the paired (plain/shifted) attention blocks, and the patch-level
resampling layers."""

import numpy as np

from ..autodiff import (
    Linear,
    LayerNorm,
    Module,
    Tensor,
    concat,
    gather_rows,
    gelu,
    matmul,
    pad,
    reshape,
    roll,
    softmax_lastdim,
    transpose,
)
from ..errors import ConfigError, DimensionError
from .windows import (
    FeatureMap,
    attention_mask,
    relative_position_index,
    window_partition,
    window_reverse,
)


class WindowAttention(Module):
    """Multi-head self-attention over one window with learned relative bias.

    Computes softmax(Q K^T / sqrt(d) + B [+ mask]) V per head, concatenates
    heads and applies an output projection.  B is gathered from a
    (2M-1)^2-row table indexed by token-pair offsets.
    """

    def __init__(self, dim, num_heads, window, rng, dtype=np.float32):
        if dim % num_heads:
            raise ConfigError(f"{dim} channels not divisible by {num_heads} heads")
        self.num_heads = num_heads
        self.window = window
        self.qkv = Linear(dim, 3 * dim, rng, dtype=dtype)
        self.proj = Linear(dim, dim, rng, dtype=dtype)
        self.bias_table = Tensor(
            np.zeros(((2 * window - 1) ** 2, num_heads), dtype=dtype),
            requires_grad=True,
        )

    def __call__(self, windows, mask=None):
        b, n, c = windows.shape
        heads = self.num_heads
        d = c // heads
        qkv = reshape(self.qkv(windows), (b, n, 3, heads, d))
        qkv = transpose(qkv, (2, 0, 3, 1, 4))
        q, k, v = qkv[0], qkv[1], qkv[2]
        scores = matmul(q, transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(d))
        index = relative_position_index(self.window)[:n, :n]
        bias = gather_rows(self.bias_table, index.reshape(-1))
        scores = scores + transpose(reshape(bias, (n, n, heads)), (2, 0, 1))
        if mask is not None:
            per_grid = mask.shape[0]
            scores = reshape(scores, (b // per_grid, per_grid, heads, n, n))
            scores = scores + Tensor(
                mask[None, :, None, :, :].astype(scores.data.dtype)
            )
            scores = reshape(scores, (b, heads, n, n))
        attn = softmax_lastdim(scores)
        out = matmul(attn, v)
        out = reshape(transpose(out, (0, 2, 1, 3)), (b, n, c))
        return self.proj(out)


def _attend(fm, window, shift, attn):
    """Pad to a window multiple, cyclically shift, attend, undo everything."""
    b, c = fm.tokens.shape[0], fm.channels
    hp = -(-fm.h // window) * window
    wp = -(-fm.w // window) * window
    grid = fm.grid()
    if (hp, wp) != (fm.h, fm.w):
        grid = pad(grid, ((0, 0), (0, hp - fm.h), (0, wp - fm.w), (0, 0)))
    if shift:
        grid = roll(grid, (-shift, -shift), (1, 2))
    mask = attention_mask(hp, wp, fm.h, fm.w, window, shift)
    out = attn(window_partition(FeatureMap(reshape(grid, (b, hp * wp, c)), hp, wp), window), mask)
    grid = window_reverse(out, hp, wp).grid()
    if shift:
        grid = roll(grid, (shift, shift), (1, 2))
    if (hp, wp) != (fm.h, fm.w):
        grid = grid[:, : fm.h, : fm.w, :]
    return reshape(grid, (b, fm.h * fm.w, c))


class SwinBlock(Module):
    """Pre-norm attention + residual, then pre-norm MLP + residual.

    ``shifted`` blocks roll the grid by floor(window/2) before windowing;
    the shift is suppressed when the whole map fits in one window.
    """

    def __init__(self, dim, num_heads, window, shifted, rng, mlp_ratio=4.0,
                 dtype=np.float32):
        self.window = window
        self.shifted = shifted
        self.norm1 = LayerNorm(dim, dtype=dtype)
        self.attn = WindowAttention(dim, num_heads, window, rng, dtype=dtype)
        self.norm2 = LayerNorm(dim, dtype=dtype)
        hidden = int(dim * mlp_ratio)
        self.fc1 = Linear(dim, hidden, rng, dtype=dtype)
        self.fc2 = Linear(hidden, dim, rng, dtype=dtype)

    def __call__(self, fm):
        shift = self.window // 2 if self.shifted else 0
        if min(fm.h, fm.w) <= self.window:
            shift = 0
        x = fm.tokens
        x = x + _attend(
            FeatureMap(self.norm1(x), fm.h, fm.w), self.window, shift, self.attn
        )
        x = x + self.fc2(gelu(self.fc1(self.norm2(x))))
        return FeatureMap(x, fm.h, fm.w)


class SwinStage(Module):
    """An even run of blocks alternating plain and shifted windows."""

    def __init__(self, dim, depth, num_heads, window, rng, mlp_ratio=4.0,
                 dtype=np.float32):
        if depth % 2:
            raise ConfigError(f"stage depth {depth} must be even")
        self.blocks = [
            SwinBlock(dim, num_heads, window, shifted=(i % 2 == 1), rng=rng,
                      mlp_ratio=mlp_ratio, dtype=dtype)
            for i in range(depth)
        ]

    def __call__(self, fm):
        for block in self.blocks:
            fm = block(fm)
        return fm


class PatchEmbed(Module):
    """Flatten non-overlapping pixel patches and project them to tokens."""

    def __init__(self, patch, in_channels, dim, rng, dtype=np.float32):
        self.patch = patch
        self.in_channels = in_channels
        self.proj = Linear(patch * patch * in_channels, dim, rng, dtype=dtype)

    def __call__(self, images):
        b, h, w, c = images.shape
        p = self.patch
        if h % p or w % p:
            raise DimensionError(f"image extents {h}x{w} not divisible by patch {p}")
        if c != self.in_channels:
            raise DimensionError(f"expected {self.in_channels} channels, got {c}")
        hh, ww = h // p, w // p
        x = reshape(images, (b, hh, p, ww, p, c))
        x = transpose(x, (0, 1, 3, 2, 4, 5))
        x = reshape(x, (b, hh * ww, p * p * c))
        return FeatureMap(self.proj(x), hh, ww)


class PatchMerge(Module):
    """Concatenate each 2x2 token group and reduce 4C -> 2C linearly."""

    def __init__(self, dim, rng, bias=False, dtype=np.float32):
        self.reduce = Linear(4 * dim, 2 * dim, rng, bias=bias, dtype=dtype)

    def __call__(self, fm):
        if fm.h % 2 or fm.w % 2:
            raise DimensionError(f"cannot merge odd extents {fm.h}x{fm.w}")
        grid = fm.grid()
        groups = concat(
            [
                grid[:, 0::2, 0::2, :],
                grid[:, 1::2, 0::2, :],
                grid[:, 0::2, 1::2, :],
                grid[:, 1::2, 1::2, :],
            ],
            axis=3,
        )
        b = fm.tokens.shape[0]
        h2, w2 = fm.h // 2, fm.w // 2
        out = self.reduce(reshape(groups, (b, h2 * w2, 4 * fm.channels)))
        return FeatureMap(out, h2, w2)


class PatchExpand(Module):
    """Double resolution: expand channels C -> 2C, then scatter each token's
    channel groups into its 2x2 spatial block (C/2 channels each)."""

    def __init__(self, dim, rng, dtype=np.float32):
        if dim % 2:
            raise DimensionError(f"cannot halve odd channel count {dim}")
        self.expand = Linear(dim, 2 * dim, rng, bias=False, dtype=dtype)

    def __call__(self, fm):
        b, c = fm.tokens.shape[0], fm.channels
        half = c // 2
        y = self.expand(fm.tokens)
        grid = reshape(y, (b, fm.h, fm.w, 2, 2, half))
        grid = transpose(grid, (0, 1, 3, 2, 4, 5))
        return FeatureMap(
            reshape(grid, (b, 4 * fm.h * fm.w, half)), 2 * fm.h, 2 * fm.w
        )


class FinalExpand(Module):
    """Restore patch-level resolution (factor x) keeping the channel count."""

    def __init__(self, dim, factor, rng, dtype=np.float32):
        self.factor = factor
        self.expand = Linear(dim, factor * factor * dim, rng, bias=False, dtype=dtype)

    def __call__(self, fm):
        b, c = fm.tokens.shape[0], fm.channels
        f = self.factor
        y = self.expand(fm.tokens)
        grid = reshape(y, (b, fm.h, fm.w, f, f, c))
        grid = transpose(grid, (0, 1, 3, 2, 4, 5))
        return FeatureMap(
            reshape(grid, (b, f * fm.h * f * fm.w, c)), f * fm.h, f * fm.w
        )
