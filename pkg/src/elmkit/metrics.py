"""Evaluation: confusion matrices, accuracy, and vote-based stream decisions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import Rng, as_matrix


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows = truth, cols = predicted
    class_names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise ValueError("counts must be a square matrix")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        if self.class_names is not None and len(self.class_names) != c.shape[0]:
            raise ValueError("one class name per row required")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_predictions(cls, truth, predicted, n_classes: int, class_names=None):
        truth = np.asarray(truth, dtype=np.int64).ravel()
        predicted = np.asarray(predicted, dtype=np.int64).ravel()
        if truth.size != predicted.size:
            raise ValueError("truth and predicted must align")
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        np.add.at(counts, (truth, predicted), 1)
        return cls(counts, tuple(class_names) if class_names else None)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]


def accuracy(cm: ConfusionMatrix) -> float:
    """Overall accuracy: trace over total."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts) / cm.total)


def per_class_accuracy(cm: ConfusionMatrix) -> np.ndarray:
    """One-vs-rest (TP + TN) / total for each class."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    total = cm.total
    tp = np.diag(cm.counts).astype(np.float64)
    fp = cm.counts.sum(axis=0) - tp
    fn = cm.counts.sum(axis=1) - tp
    tn = total - tp - fp - fn
    return (tp + tn) / total


def write_confusion_csv(cm: ConfusionMatrix, path) -> None:
    names = cm.class_names or tuple(str(i) for i in range(cm.n_classes))
    with open(path, "w", newline="") as f:
        f.write(",".join(names) + "\n")
        for row in cm.counts:
            f.write(",".join(str(int(v)) for v in row) + "\n")


@dataclass(frozen=True)
class ActiveDecision:
    fractions: np.ndarray  # per-class vote share over the frames used
    decision: int | None  # None when the top share is below the threshold
    frames_used: int


def active_classify(frame_scores, t_c: float, window: int) -> ActiveDecision:
    """Vote over per-frame argmax decisions and decide once the share clears t_c.

    Consumes at most ``window`` frames from the stream.  The caller extends
    the stream and calls again when the result is undecided.
    """
    scores = as_matrix(frame_scores, "frame_scores", min_rows=0)
    if scores.shape[0] == 0:
        raise ValueError("empty stream: need at least one frame of scores")
    if not 0.0 < t_c <= 1.0:
        raise ValueError("t_c must be in (0, 1]")
    if window < 1:
        raise ValueError("window must be >= 1")
    used = min(scores.shape[0], window)
    votes = np.bincount(np.argmax(scores[:used], axis=1), minlength=scores.shape[1])
    fractions = votes / used
    top = int(np.argmax(fractions))
    decision = top if fractions[top] >= t_c else None
    return ActiveDecision(fractions, decision, used)


def simulate_streams(
    scores,
    labels,
    t_c: float,
    window: int,
    episodes_per_class: int,
    rng: Rng,
) -> list[tuple[int, ActiveDecision]]:
    """Replay per-frame scores as per-object streams.

    Each episode picks ``window`` frames of one true class (with
    replacement, seeded) and runs the vote; returns (true class, decision)
    pairs across all classes.
    """
    scores = as_matrix(scores, "scores")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.size != scores.shape[0]:
        raise ValueError("one label per score row required")
    gen = rng.generator()
    episodes = []
    for cls in range(scores.shape[1]):
        pool = np.flatnonzero(labels == cls)
        if pool.size == 0:
            continue
        for _ in range(episodes_per_class):
            picks = gen.choice(pool, size=window, replace=True)
            episodes.append((cls, active_classify(scores[picks], t_c, window)))
    return episodes
