"""Model file container shared by every classifier kind.

A model file is a NumPy ``.npz`` archive. The entry ``__meta__`` holds a
UTF-8 JSON document ``{"format": "ramanwt-model", "version": 1, "kind":
<kind>, "params": {...}}``; every other entry is a named parameter array
stored at full precision, so a reloaded model predicts bit-identically.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

FORMAT = "ramanwt-model"
VERSION = 1

_REGISTRY = {}


def register(kind):
    def deco(cls):
        _REGISTRY[kind] = cls
        cls.kind = kind
        return cls

    return deco


def save_model(model, path) -> None:
    params, arrays = model.get_state()
    meta = {"format": FORMAT, "version": VERSION, "kind": model.kind, "params": params}
    if "__meta__" in arrays:
        raise ValueError("'__meta__' is a reserved array name")
    buf = io.BytesIO()
    np.savez(buf, __meta__=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8), **arrays)
    Path(path).write_bytes(buf.getvalue())


def read_meta(path) -> dict:
    with np.load(path, allow_pickle=False) as z:
        return json.loads(z["__meta__"].tobytes().decode())


def load_model(path):
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(z["__meta__"].tobytes().decode())
        arrays = {k: z[k] for k in z.files if k != "__meta__"}
    if meta.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} file")
    if meta.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported model version {meta.get('version')}")
    kind = meta["kind"]
    if kind not in _REGISTRY:
        # make sure optional kinds have registered themselves
        from . import classifiers, dcnn  # noqa: F401
    return _REGISTRY[kind].from_state(meta["params"], arrays)
