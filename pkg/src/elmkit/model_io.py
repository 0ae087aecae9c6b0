"""Versioned binary model container: JSON header plus raw array sections.

Layout: 8-byte magic ``ELMKITM\\x01``, a little-endian uint32 header
length, the UTF-8 JSON header, then the concatenated float64 array
payloads in the order the header lists them.  Values that determine the
bytes (key order, dtype endianness) are pinned so that identical models
serialize identically; nothing time- or host-dependent is written.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .autoencoder import Autoencoder, FeatureStack
from .elm import ElmModel
from .pipeline import FeatureScaler, HmlModel, PipelineConfig, TrainMetrics
from .sit2 import Sit2Model
from .type_reduction import It2RuleBase

MAGIC = b"ELMKITM\x01"
FORMAT_VERSION = 1


def _array_bytes(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _collect_head(head):
    if isinstance(head, Sit2Model):
        meta = {"type": "sit2", "stage": head.stage}
        arrays = {
            "head.centers": head.rules.centers,
            "head.sigma_lower": head.rules.sigma_lower,
            "head.sigma_upper": head.rules.sigma_upper,
            "head.consequents": head.consequents,
        }
    elif isinstance(head, ElmModel):
        meta = {"type": "elm", "activation": head.activation}
        arrays = {
            "head.input_weights": head.input_weights,
            "head.biases": head.biases,
            "head.output_weights": head.output_weights,
        }
    elif isinstance(head, np.ndarray):
        meta = {"type": "ridge"}
        arrays = {"head.weights": head}
    else:
        raise TypeError(f"cannot serialize head of type {type(head).__name__}")
    return meta, arrays


def _restore_head(meta, arrays):
    if meta["type"] == "sit2":
        rules = It2RuleBase(
            arrays["head.centers"],
            arrays["head.sigma_lower"],
            arrays["head.sigma_upper"],
        )
        return Sit2Model(rules, arrays["head.consequents"], meta["stage"])
    if meta["type"] == "elm":
        return ElmModel(
            arrays["head.input_weights"],
            arrays["head.biases"],
            arrays["head.output_weights"],
            meta["activation"],
        )
    if meta["type"] == "ridge":
        return arrays["head.weights"]
    raise ValueError(f"unknown head type {meta['type']!r}")


def save_model(model: HmlModel, path) -> None:
    """Serialize atomically (write to a temp file, then rename)."""
    head_meta, arrays = _collect_head(model.head)
    arrays = dict(arrays)
    arrays["scaler.offset"] = model.scaler.offset
    arrays["scaler.span"] = model.scaler.span
    layer_meta = []
    for i, ae in enumerate(model.stack.layers):
        arrays[f"stack.{i}.beta"] = ae.beta
        layer_meta.append(
            {
                "mode": ae.mode,
                "activation": ae.activation,
                "c": ae.c,
                "reconstruction_error": ae.reconstruction_error,
                "beta_orthogonality_gap": ae.beta_orthogonality_gap,
            }
        )
    names = sorted(arrays)
    sections = []
    offset = 0
    for name in names:
        a = np.asarray(arrays[name], dtype=np.float64)
        nbytes = a.size * 8
        sections.append(
            {"name": name, "shape": list(a.shape), "offset": offset, "nbytes": nbytes}
        )
        offset += nbytes
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "hml",
        "config": model.config.to_dict(),
        "n_classes": model.n_classes,
        "train_accuracy": model.metrics.train_accuracy,
        "head": head_meta,
        "stack_layers": layer_meta,
        "arrays": sections,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", len(blob)))
            f.write(blob)
            for name in names:
                f.write(_array_bytes(np.asarray(arrays[name])))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path) -> HmlModel:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a model file (bad magic)")
        (header_len,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(header_len).decode())
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"{path}: unsupported model format version {header.get('format_version')}"
            )
        payload = f.read()
    arrays = {}
    for section in header["arrays"]:
        start = section["offset"]
        raw = payload[start : start + section["nbytes"]]
        if len(raw) != section["nbytes"]:
            raise ValueError(f"{path}: truncated array payload for {section['name']}")
        arrays[section["name"]] = np.frombuffer(raw, dtype="<f8").reshape(section["shape"]).copy()
    scaler = FeatureScaler(arrays["scaler.offset"], arrays["scaler.span"])
    layers = []
    for i, meta in enumerate(header["stack_layers"]):
        layers.append(
            Autoencoder(
                arrays[f"stack.{i}.beta"],
                meta["mode"],
                meta["activation"],
                meta["c"],
                meta["reconstruction_error"],
                meta["beta_orthogonality_gap"],
            )
        )
    head = _restore_head(header["head"], arrays)
    config = PipelineConfig.from_dict(header["config"])
    metrics = TrainMetrics(0.0, 0.0, header["train_accuracy"])
    return HmlModel(scaler, FeatureStack(tuple(layers)), head, config, header["n_classes"], metrics)
