"""Composition of the autoencoder stack with a classifier head.

Training has two independent phases: the stack learns feature encodings
without seeing labels, then a head (fuzzy TSK, plain ridge, or a random
hidden-layer baseline) is fit on the encoded features.  Nothing is tuned
across the boundary, so a head can be retrained without touching the
stack.  Feature scaling to [0, 1] is frozen from the training split.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .autoencoder import FeatureStack, stack_train, stack_transform
from .elm import ElmModel, elm_predict, elm_train, predict_labels
from .numerics import Rng, as_matrix, ridge_solve
from .sit2 import Sit2Model, sit2_predict, sit2_train

HEADS = ("sit2", "ridge", "elm")


@dataclass(frozen=True)
class PipelineConfig:
    layer_sizes: tuple[int, ...]  # autoencoder widths, input width excluded
    cs: tuple[float, ...]  # one ridge constant per layer plus one for the head
    head: str = "sit2"
    head_size: int = 40  # fuzzy rules for sit2, hidden nodes for elm; ridge ignores it
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(m) for m in self.layer_sizes))
        object.__setattr__(self, "cs", tuple(float(c) for c in self.cs))
        if not self.layer_sizes:
            raise ValueError("layer_sizes must name at least one autoencoder layer")
        if any(m < 1 for m in self.layer_sizes):
            raise ValueError("layer widths must be >= 1")
        if len(self.cs) != len(self.layer_sizes) + 1:
            raise ValueError(
                f"need {len(self.layer_sizes) + 1} ridge constants "
                f"(one per layer plus the head), got {len(self.cs)}"
            )
        if any(not c > 0 for c in self.cs):
            raise ValueError("every ridge constant must be positive")
        if self.head not in HEADS:
            raise ValueError(f"unknown head {self.head!r}; expected one of {HEADS}")
        if self.head != "ridge" and self.head_size < 1:
            raise ValueError("head_size must be >= 1")

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "Cs": list(self.cs),
            "head": self.head,
            "head_size": self.head_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {"layer_sizes", "Cs", "head", "head_size", "seed"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "layer_sizes" not in d or "Cs" not in d:
            raise ValueError("config requires layer_sizes and Cs")
        cs = [float(c) for c in d["Cs"]]
        return cls(
            layer_sizes=tuple(d["layer_sizes"]),
            cs=tuple(cs),
            head=d.get("head", "sit2"),
            head_size=int(d.get("head_size", 40)),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature affine map onto [0, 1], frozen from the training split."""

    offset: np.ndarray
    span: np.ndarray  # zero-range features get span 1 and map to 0

    @classmethod
    def fit(cls, x: np.ndarray) -> "FeatureScaler":
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        span = np.where(span > 0.0, span, 1.0)
        return cls(lo, span)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.offset) / self.span


@dataclass(frozen=True)
class TrainMetrics:
    stack_seconds: float
    head_seconds: float
    train_accuracy: float

    @property
    def total_seconds(self) -> float:
        return self.stack_seconds + self.head_seconds


Head = Union[Sit2Model, ElmModel, np.ndarray]


@dataclass(frozen=True)
class HmlModel:
    scaler: FeatureScaler
    stack: FeatureStack
    head: Head
    config: PipelineConfig
    n_classes: int
    metrics: TrainMetrics

    @property
    def n_features(self) -> int:
        return self.stack.layers[0].n_inputs


def _head_train(feats, t, config: PipelineConfig, rng: Rng) -> Head:
    c = config.cs[-1]
    if config.head == "sit2":
        return sit2_train(feats, t, config.head_size, rng, c=c)
    if config.head == "elm":
        return elm_train(feats, t, config.head_size, c, rng)
    return ridge_solve(np.hstack([feats, np.ones((feats.shape[0], 1))]), t, c)


def _head_predict(head: Head, feats: np.ndarray) -> np.ndarray:
    if isinstance(head, Sit2Model):
        return sit2_predict(head, feats)
    if isinstance(head, ElmModel):
        return elm_predict(head, feats)
    return np.hstack([feats, np.ones((feats.shape[0], 1))]) @ head


def one_hot(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels out of range [0, {n_classes})")
    return np.eye(n_classes)[labels]


def hml_train(x, labels, config: PipelineConfig) -> HmlModel:
    """Standardize, train the stack, then fit the head on encoded features."""
    x = as_matrix(x, "x")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size != x.shape[0]:
        raise ValueError("one label per sample required")
    n_classes = int(labels.max()) + 1 if labels.size else 0
    if n_classes < 2:
        raise ValueError("need >= 2 classes in the labels")
    rng = Rng(config.seed)
    scaler = FeatureScaler.fit(x)
    xs = scaler.transform(x)
    t0 = time.perf_counter()
    stack = stack_train(xs, config.layer_sizes, config.cs[:-1], rng.split(0))
    t1 = time.perf_counter()
    feats = stack_transform(stack, xs)
    head = _head_train(feats, one_hot(labels, n_classes), config, rng.split(1))
    t2 = time.perf_counter()
    accuracy = float((predict_labels(_head_predict(head, feats)) == labels).mean())
    metrics = TrainMetrics(t1 - t0, t2 - t1, accuracy)
    return HmlModel(scaler, stack, head, config, n_classes, metrics)


def retrain_head(model: HmlModel, x, labels, seed: int | None = None) -> HmlModel:
    """Fit a fresh head on the existing (untouched) stack."""
    x = as_matrix(x, "x")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    config = model.config if seed is None else replace(model.config, seed=seed)
    feats = stack_transform(model.stack, model.scaler.transform(x))
    t0 = time.perf_counter()
    head = _head_train(feats, one_hot(labels, model.n_classes), config, Rng(config.seed).split(1))
    t1 = time.perf_counter()
    accuracy = float((predict_labels(_head_predict(head, feats)) == labels).mean())
    metrics = TrainMetrics(model.metrics.stack_seconds, t1 - t0, accuracy)
    return HmlModel(model.scaler, model.stack, head, config, model.n_classes, metrics)


def hml_predict(model: HmlModel, x) -> np.ndarray:
    """Score matrix for x; argmax of a row is the predicted class."""
    x = as_matrix(x, "x", min_rows=0)
    if x.shape[1] != model.n_features:
        raise ValueError(
            f"feature mismatch: model expects {model.n_features}, got {x.shape[1]}"
        )
    feats = stack_transform(model.stack, model.scaler.transform(x))
    return _head_predict(model.head, feats)
