"""Binary checkpoint container for named tensors.

Layout::

    b"LKCKPT1\\n"
    u64 little-endian manifest byte length
    manifest JSON (UTF-8, sorted keys):
        {"meta": {...}, "tensors": [{"name", "dtype", "shape", "offset"}, ...]}
    raw little-endian tensor payloads, back to back

Offsets are relative to the start of the payload region.  Serialization
is deterministic, so save(load(path)) round-trips byte-exactly.
"""

import json
import struct

import numpy as np

from ..errors import InputError
from .tensor import Tensor

MAGIC = b"LKCKPT1\n"


def save_checkpoint(path, tensors, meta=None):
    """Write ``{name: array-or-Tensor}`` to ``path`` with optional JSON meta."""
    entries = []
    payloads = []
    offset = 0
    for name in sorted(tensors):
        value = tensors[name]
        if isinstance(value, Tensor):
            value = value.data
        arr = np.asarray(value)
        if not arr.flags["C_CONTIGUOUS"]:
            arr = np.ascontiguousarray(arr)
        le = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        raw = le.tobytes()
        entries.append({
            "name": name,
            "dtype": le.dtype.str,
            "shape": list(arr.shape),
            "offset": offset,
        })
        payloads.append(raw)
        offset += len(raw)
    manifest = {"meta": meta or {}, "tensors": entries}
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for raw in payloads:
            fh.write(raw)


def load_checkpoint(path):
    """Read a checkpoint; returns ({name: ndarray}, meta dict)."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise InputError(f"{path}: bad checkpoint magic {magic!r}")
        (length,) = struct.unpack("<Q", fh.read(8))
        manifest = json.loads(fh.read(length).decode("utf-8"))
        payload = fh.read()
    tensors = {}
    for entry in manifest["tensors"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        stop = start + count * dtype.itemsize
        arr = np.frombuffer(payload[start:stop], dtype=dtype).reshape(shape)
        tensors[entry["name"]] = arr.copy()
    return tensors, manifest.get("meta", {})


def load_into(path, module):
    """Load a checkpoint into a module's named parameters (shape-checked)."""
    tensors, meta = load_checkpoint(path)
    params = module.named_parameters()
    missing = sorted(set(params) - set(tensors))
    extra = sorted(set(tensors) - set(params))
    if missing or extra:
        raise InputError(
            f"{path}: parameter names do not match module "
            f"(missing={missing[:3]}, extra={extra[:3]})"
        )
    for name, param in params.items():
        arr = tensors[name]
        if arr.shape != param.data.shape:
            raise InputError(
                f"{path}: {name} has shape {arr.shape}, expected {param.data.shape}"
            )
        param.data = arr.astype(param.data.dtype)
    return meta
