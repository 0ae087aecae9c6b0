"""Seeded random streams and the dense linear-algebra kernels shared by all models.

Every training routine in the package reduces to a handful of primitives:
a regularized least-squares solve, a Moore-Penrose inverse, and random
orthonormal projections drawn from a reproducible counter-based stream.
They live here so their numerical behaviour is pinned down in one place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericalError(RuntimeError):
    """A linear system could not be solved as posed (rank deficiency, divergence)."""


_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    # splitmix64 finalizer; decorrelates derived stream ids
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class Rng:
    """Immutable handle on a counter-based random stream.

    The same (seed, stream) pair yields bit-identical draws on every run and
    platform.  ``generator()`` always starts from the beginning of the
    stream, so functions holding an ``Rng`` stay pure; use ``split`` to hand
    independent streams to sub-tasks (one per autoencoder layer, one per
    training phase, ...).
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, child: int) -> "Rng":
        return Rng(self.seed, _mix64((self.stream * 0x9E3779B97F4A7C15 + child + 1) & _MASK64))


def as_matrix(a, name: str = "matrix", min_rows: int = 1) -> np.ndarray:
    """Coerce to a finite float64 2-D array, validating shape."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < min_rows or m.shape[1] < 1:
        raise ValueError(f"{name} has degenerate shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return m


def _solve_spd(gram: np.ndarray, rhs: np.ndarray, c: float) -> np.ndarray:
    """Solve (gram + I/c) x = rhs by Cholesky with a jittered retry ladder.

    The ridge term keeps the system positive definite except in pathological
    cases; on failure the diagonal is jittered by 1e-10 * trace/n, doubled up
    to three times.  With c = inf no jitter is applied: a singular system is
    reported instead of silently regularized.
    """
    n = gram.shape[0]
    ridge = 0.0 if math.isinf(c) else 1.0 / c
    base = 1e-10 * (np.trace(gram) / n if np.trace(gram) > 0 else 1.0)
    jitter = 0.0
    for attempt in range(4):
        a = gram.copy()
        a.flat[:: n + 1] += ridge + jitter
        try:
            cf = scipy.linalg.cho_factor(a, lower=True, overwrite_a=True, check_finite=False)
            if ridge + jitter == 0.0:
                # rounding can let potrf succeed on a singular matrix; vet the factor
                d = np.abs(np.diag(cf[0]))
                if d.min() ** 2 <= 16.0 * n * np.finfo(np.float64).eps * d.max() ** 2:
                    raise np.linalg.LinAlgError("factor is numerically rank deficient")
            return scipy.linalg.cho_solve(cf, rhs, check_finite=False)
        except np.linalg.LinAlgError:
            if math.isinf(c):
                raise NumericalError(
                    "system is rank deficient with c = inf; supply a finite c"
                ) from None
            jitter = base * (2.0 ** attempt)
    raise NumericalError("Cholesky failed even after jittered retries")


def ridge_solve(h: np.ndarray, t: np.ndarray, c: float) -> np.ndarray:
    """Minimize ||h b - t||^2 + (1/c) ||b||^2 over b.

    Solves the normal equations (I/c + h'h) b = h't when the system is tall
    (cols <= rows) and the dual form b = h'(I/c + hh')^{-1} t when it is
    wide.  ``c`` may be ``math.inf`` for plain least squares, which then
    requires full rank.
    """
    h = as_matrix(h, "h")
    t = as_matrix(t, "t")
    if h.shape[0] != t.shape[0]:
        raise ValueError(f"row mismatch: h has {h.shape[0]} rows, t has {t.shape[0]}")
    if not c > 0:
        raise ValueError("c must be positive (math.inf allowed)")
    rows, cols = h.shape
    if cols <= rows:
        b = _solve_spd(h.T @ h, h.T @ t, c)
    else:
        b = h.T @ _solve_spd(h @ h.T, t, c)
    if not np.all(np.isfinite(b)):
        raise NumericalError("ridge solution contains non-finite entries")
    # canonical row-major layout so downstream matmuls take identical BLAS
    # paths whether the weights are fresh or deserialized
    return np.ascontiguousarray(b)


def pseudo_inverse(h: np.ndarray) -> np.ndarray:
    """Moore-Penrose inverse through the least-squares identities.

    Full-rank input resolves exactly ((h'h)^{-1}h' or h'(hh')^{-1}); an
    exactly singular input falls back to a heavily ridged solve (c = 1e12),
    trading the unreachable exact inverse for a bounded approximation.
    """
    h = as_matrix(h, "h")
    eye = np.eye(h.shape[0])
    try:
        return ridge_solve(h, eye, math.inf)
    except NumericalError:
        return ridge_solve(h, eye, 1e12)


def orthonormal_random(rows: int, cols: int, rng: Rng) -> np.ndarray:
    """Column-orthonormal matrix obtained by QR of standard-normal draws."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if cols > rows:
        raise ValueError(
            "cols > rows: a wide matrix cannot have orthonormal columns; "
            "draw the transpose and flip it instead"
        )
    g = rng.generator().standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    # canonical sign so the map from seed to matrix is unambiguous
    q = q * np.where(np.diag(r) >= 0.0, 1.0, -1.0)
    return q


def unit_row(n: int, rng: Rng) -> np.ndarray:
    """Unit-norm row vector of standard-normal draws (b b' = 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    v = rng.generator().standard_normal(n)
    return v / np.linalg.norm(v)
