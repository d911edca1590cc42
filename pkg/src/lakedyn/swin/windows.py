"""Token-grid bookkeeping: window partitioning, relative-offset indexing,
and the additive attention masks for shifted windows and padded tokens."""

import functools
import math
from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, reshape, transpose
from ..errors import DimensionError

MASK_VALUE = -1e4


@dataclass
class FeatureMap:
    """Tokens of one resolution level: [batch, h*w, channels] plus extents."""

    tokens: Tensor
    h: int
    w: int

    def __post_init__(self):
        if self.tokens.shape[1] != self.h * self.w:
            raise DimensionError(
                f"token count {self.tokens.shape[1]} != h*w = {self.h}*{self.w}"
            )

    @property
    def channels(self):
        return self.tokens.shape[2]

    def grid(self):
        b = self.tokens.shape[0]
        return reshape(self.tokens, (b, self.h, self.w, self.channels))


def window_partition(fm, window):
    """Split a feature map into non-overlapping windows: [B*nW, window^2, C]."""
    if fm.h % window or fm.w % window:
        raise DimensionError(
            f"extents {fm.h}x{fm.w} not divisible by window {window}"
        )
    b, c = fm.tokens.shape[0], fm.channels
    nh, nw = fm.h // window, fm.w // window
    x = reshape(fm.tokens, (b, nh, window, nw, window, c))
    x = transpose(x, (0, 1, 3, 2, 4, 5))
    return reshape(x, (b * nh * nw, window * window, c))


def window_reverse(windows, h, w):
    """Inverse of :func:`window_partition` for the given spatial extents."""
    n = windows.shape[1]
    window = math.isqrt(n)
    if window * window != n or h % window or w % window:
        raise DimensionError(
            f"cannot place {windows.shape[0]} windows of {n} tokens on {h}x{w}"
        )
    nh, nw = h // window, w // window
    b = windows.shape[0] // (nh * nw)
    c = windows.shape[2]
    x = reshape(windows, (b, nh, nw, window, window, c))
    x = transpose(x, (0, 1, 3, 2, 4, 5))
    return FeatureMap(reshape(x, (b, h * w, c)), h, w)


@functools.lru_cache(maxsize=None)
def relative_position_index(window):
    """[window^2, window^2] map from token pairs to bias-table rows.

    Two pairs with the same (drow, dcol) offset share an entry; the table
    holds (2*window - 1)^2 rows.
    """
    coords = np.stack(
        np.meshgrid(np.arange(window), np.arange(window), indexing="ij")
    ).reshape(2, -1)
    rel = coords[:, :, None] - coords[:, None, :]
    rel = rel.transpose(1, 2, 0) + (window - 1)
    return (rel[:, :, 0] * (2 * window - 1) + rel[:, :, 1]).astype(np.int64)


@functools.lru_cache(maxsize=None)
def attention_mask(hp, wp, h, w, window, shift):
    """Additive [nW, window^2, window^2] mask, or None when nothing to block.

    Blocks (a) attention into padding tokens (rows >= h or cols >= w before
    the cyclic shift) and (b) attention between tokens that a cyclic shift
    wrapped together from non-adjacent regions.  Labels are assigned on the
    post-shift grid; unequal labels get MASK_VALUE.
    """
    if hp == h and wp == w and shift == 0:
        return None
    labels = np.zeros((hp, wp), dtype=np.int64)
    if shift > 0:
        bands_h = ((0, hp - window), (hp - window, hp - shift), (hp - shift, hp))
        bands_w = ((0, wp - window), (wp - window, wp - shift), (wp - shift, wp))
        tag = 0
        for h0, h1 in bands_h:
            for w0, w1 in bands_w:
                labels[h0:h1, w0:w1] = tag
                tag += 1
    if hp != h or wp != w:
        padded = np.zeros((hp, wp), dtype=bool)
        padded[h:, :] = True
        padded[:, w:] = True
        if shift > 0:
            padded = np.roll(padded, (-shift, -shift), axis=(0, 1))
        labels[padded] = -1
    nh, nw = hp // window, wp // window
    tiles = labels.reshape(nh, window, nw, window).transpose(0, 2, 1, 3)
    tiles = tiles.reshape(nh * nw, window * window)
    diff = tiles[:, :, None] != tiles[:, None, :]
    return np.where(diff, MASK_VALUE, 0.0)
