"""Versioned JSON model container.

Layout (version 1):

    {
      "format": "mlkfhe-model",
      "version": 1,
      "metadata": {...caller-supplied strings/numbers...},
      "model": <payload>
    }

Payloads are nested dicts in which registered dataclasses appear as
{"__type__": <class name>, <field>: <payload>, ...} and numpy arrays as
{"__ndarray__": true, "dtype": ..., "shape": [...], "data": <base64 of raw
little-endian bytes>}. Scalars use JSON numbers (Python round-trips float64
exactly through repr). Keys are sorted, so identical models serialize to
identical bytes; save -> load -> predict is bit-identical.

Diagnostic fields (training history, training scores, per-node train indices)
are not persisted.
"""

from __future__ import annotations

import base64
import json
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .components import (
    BinaryRelevanceModel,
    ChainModel,
    ConstantModel,
    HomerModel,
    HomerNode,
)
from .ensembles import BaggedModel, KfheModel
from .learners import FittedBinaryModel, RadialFeatureMap

FORMAT_NAME = "mlkfhe-model"
FORMAT_VERSION = 1

_TYPES = {
    cls.__name__: cls
    for cls in (
        KfheModel,
        BaggedModel,
        HomerModel,
        HomerNode,
        ChainModel,
        BinaryRelevanceModel,
        ConstantModel,
        FittedBinaryModel,
        RadialFeatureMap,
    )
}

# Diagnostic-only fields, dropped on save and defaulted on load.
_SKIP_FIELDS = {
    "KfheModel": {"history", "training_scores", "final_weights"},
    "HomerNode": {"train_indices"},
    "FittedBinaryModel": {"final_loss"},
}


def _encode(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        a = np.ascontiguousarray(obj)
        return {
            "__ndarray__": True,
            "dtype": a.dtype.str,
            "shape": list(a.shape),
            "data": base64.b64encode(a.tobytes()).decode("ascii"),
        }
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, dict):
        if "__type__" in obj or "__ndarray__" in obj:
            raise ValueError("dict uses reserved serialization keys")
        return {str(k): _encode(v) for k, v in obj.items()}
    name = type(obj).__name__
    if name in _TYPES:
        skip = _SKIP_FIELDS.get(name, set())
        payload = {"__type__": name}
        for f in fields(obj):
            if f.name in skip:
                continue
            payload[f.name] = _encode(getattr(obj, f.name))
        return payload
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def _decode(obj):
    if isinstance(obj, dict):
        if obj.get("__ndarray__"):
            raw = base64.b64decode(obj["data"])
            a = np.frombuffer(raw, dtype=np.dtype(obj["dtype"]))
            return a.reshape(obj["shape"]).copy()
        if "__type__" in obj:
            name = obj["__type__"]
            if name not in _TYPES:
                raise ValueError(f"unknown serialized type {name!r}")
            kwargs = {k: _decode(v) for k, v in obj.items() if k != "__type__"}
            return _TYPES[name](**kwargs)
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def save_model(model, path, metadata: dict | None = None) -> None:
    """Write a fitted core model (KfheModel, BaggedModel, HomerModel, ...)."""
    document = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "metadata": {"tool": f"mlkfhe {__version__}", **(metadata or {})},
        "model": _encode(model),
    }
    text = json.dumps(document, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path):
    """Read a model container back into its fitted model object."""
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    if document.get("format") != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} file")
    if document.get("version") != FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported container version {document.get('version')}"
        )
    return _decode(document["model"])


def load_metadata(path) -> dict:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    return document.get("metadata", {})
