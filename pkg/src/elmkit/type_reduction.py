"""Interval type-2 rule firing and center-of-sets type reduction.

Rules carry Gaussian antecedents with an uncertain width, so each input
fires an interval [lower, upper] per rule.  Reducing those intervals and
the rule consequents to an output interval [y_l, y_r] is done four ways:

* ``brute_force_cos`` - exhaustive search over all binary endpoint
  assignments; the oracle the others are checked against.
* ``ekm_reduce`` - switch-point iteration over sorted consequents.
* ``sc_reduce`` - sort-free sweeps with incremental numerator/denominator
  updates; the route used by the trained classifier.
* ``nt_defuzz`` - closed-form direct defuzzification (no interval).

All reducers are degree-0 homogeneous in the firings: rescaling lower and
upper jointly by any positive factor leaves every output unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import NumericalError


@dataclass(frozen=True)
class It2RuleBase:
    """Gaussian antecedents: per-rule centers plus a width interval.

    ``sigma_lower[j] <= sigma_upper[j]`` guarantees the lower membership
    curve sits below the upper one everywhere.  Widths are scalar per rule,
    shared across input dimensions.
    """

    centers: np.ndarray  # n_rules x n_inputs
    sigma_lower: np.ndarray  # n_rules
    sigma_upper: np.ndarray  # n_rules

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        sl = np.asarray(self.sigma_lower, dtype=np.float64).ravel()
        su = np.asarray(self.sigma_upper, dtype=np.float64).ravel()
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("centers must be a 2-D array with >= 1 rule")
        if sl.shape != (c.shape[0],) or su.shape != (c.shape[0],):
            raise ValueError("need one (sigma_lower, sigma_upper) pair per rule")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(sl)) and np.all(np.isfinite(su))):
            raise ValueError("rule parameters contain NaN or Inf")
        if np.any(sl <= 0.0) or np.any(su <= 0.0):
            raise ValueError("widths must be positive")
        if np.any(sl > su):
            raise ValueError("sigma_lower must not exceed sigma_upper")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "sigma_lower", sl)
        object.__setattr__(self, "sigma_upper", su)

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class FiringInterval:
    """Per-rule activation interval, jointly rescaled so max(upper) = 1.

    ``scale_log`` records the common log-offset that was removed; reducers
    never need it (they are scale invariant) but it keeps the raw
    magnitudes recoverable.
    """

    lower: np.ndarray
    upper: np.ndarray
    scale_log: float = 0.0

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64).ravel()
        up = np.asarray(self.upper, dtype=np.float64).ravel()
        if lo.shape != up.shape or lo.size < 1:
            raise ValueError("lower and upper must be equal-length nonempty vectors")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise ValueError("firing strengths contain NaN or Inf")
        if np.any(lo < 0.0) or np.any(lo > up):
            raise ValueError("need 0 <= lower <= upper per rule")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def n_rules(self) -> int:
        return self.lower.size


@dataclass(frozen=True)
class ReducedInterval:
    """COS endpoints plus the binary band assignments that attain them.

    ``z_l[j] = 1`` means rule j contributes its upper strength to y_l
    (0 means lower); ``z_r`` likewise for y_r.
    """

    y_l: float
    y_r: float
    z_l: np.ndarray
    z_r: np.ndarray


def firing_strengths(rules: It2RuleBase, x) -> FiringInterval:
    """Product-of-Gaussians firing interval for a single input vector.

    Evaluated in log space and shifted by a common constant so the largest
    upper strength is exactly 1; the shift is harmless by scale invariance
    and keeps thousand-dimensional products from underflowing.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != rules.n_inputs:
        raise ValueError(f"input has {x.size} values, rules expect {rules.n_inputs}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains NaN or Inf")
    d2 = ((x[None, :] - rules.centers) ** 2).sum(axis=1)
    log_upper = -d2 / (2.0 * rules.sigma_upper**2)
    log_lower = -d2 / (2.0 * rules.sigma_lower**2)
    shift = float(log_upper.max())
    return FiringInterval(np.exp(log_lower - shift), np.exp(log_upper - shift), shift)


def firing_batch(rules: It2RuleBase, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise ``firing_strengths`` over a sample matrix.

    Returns (lower, upper, shifts) with lower/upper of shape (n_samples,
    n_rules).  Arithmetic matches the scalar routine exactly so both paths
    are interchangeable.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != rules.n_inputs:
        raise ValueError(f"expected (*, {rules.n_inputs}) samples, got {x.shape}")
    p = x.shape[0]
    d2 = np.empty((p, rules.n_rules))
    for j in range(rules.n_rules):
        d2[:, j] = ((x - rules.centers[j]) ** 2).sum(axis=1)
    log_upper = -d2 / (2.0 * rules.sigma_upper**2)
    log_lower = -d2 / (2.0 * rules.sigma_lower**2)
    shifts = log_upper.max(axis=1) if p else np.zeros(0)
    lower = np.exp(log_lower - shifts[:, None])
    upper = np.exp(log_upper - shifts[:, None])
    return lower, upper, shifts


def _validated(f: FiringInterval, w) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.size != f.n_rules:
        raise ValueError(f"need one consequent per rule: {w.size} vs {f.n_rules}")
    if not np.all(np.isfinite(w)):
        raise ValueError("consequents contain NaN or Inf")
    if not np.any(f.upper > 0.0):
        raise ValueError("vacuous firing: every upper strength is zero")
    return f.lower, f.upper, w


def _degenerate_interval(upper: np.ndarray, w: np.ndarray) -> ReducedInterval:
    # every lower strength is zero: endpoints are the extreme consequents
    # among rules that can fire at all, attained by firing that rule alone
    active = np.flatnonzero(upper > 0.0)
    j_min = active[np.argmin(w[active])]
    j_max = active[np.argmax(w[active])]
    z_l = np.zeros(w.size, dtype=np.int8)
    z_r = np.zeros(w.size, dtype=np.int8)
    z_l[j_min] = 1
    z_r[j_max] = 1
    return ReducedInterval(float(w[j_min]), float(w[j_max]), z_l, z_r)


# --------------------------------------------------------------------------
# exhaustive oracle


def brute_force_cos(f: FiringInterval, w) -> ReducedInterval:
    """Enumerate every binary band assignment and take the extreme outputs.

    y(z) = sum(lower + z*delta, w-weighted) / sum(lower + z*delta) with
    delta = upper - lower; assignments with a zero denominator cannot fire
    and are skipped.  Exponential in the rule count, hence the guard.
    """
    lower, upper, w = _validated(f, w)
    m = w.size
    if m > 20:
        raise ValueError(f"brute force is limited to 20 rules, got {m}")
    delta = upper - lower
    dw = delta * w
    base_num = float((lower * w).sum())
    base_den = float(lower.sum())
    best_min = np.inf
    best_max = -np.inf
    z_min = z_max = None
    n = 1 << m
    cols = np.arange(m, dtype=np.uint32)
    for start in range(0, n, 1 << 16):
        idx = np.arange(start, min(start + (1 << 16), n), dtype=np.uint32)
        z = ((idx[:, None] >> cols) & 1).astype(np.float64)
        num = base_num + z @ dw
        den = base_den + z @ delta
        ok = den > 0.0
        if not ok.any():
            continue
        y = np.where(ok, num / np.where(ok, den, 1.0), np.nan)
        i_lo = np.nanargmin(y)
        i_hi = np.nanargmax(y)
        if y[i_lo] < best_min:
            best_min = float(y[i_lo])
            z_min = z[i_lo].astype(np.int8)
        if y[i_hi] > best_max:
            best_max = float(y[i_hi])
            z_max = z[i_hi].astype(np.int8)
    if z_min is None:
        raise ValueError("vacuous firing: no assignment has positive weight")
    return ReducedInterval(best_min, best_max, z_min, z_max)


# --------------------------------------------------------------------------
# switch-point iteration over sorted consequents


def _ekm_endpoint(w: np.ndarray, lower: np.ndarray, upper: np.ndarray, left: bool):
    """One endpoint on consequents already sorted ascending.

    Returns (value, k) where ranks < k take the primary band (upper when
    computing y_l, lower for y_r) and ranks >= k the other band.
    """
    m = w.size
    delta = upper - lower
    k = int(round(m / 2.4 if left else m / 1.7))
    k = min(max(k, 1), m - 1)
    hi, lo = (upper, lower) if left else (lower, upper)
    a = float((w[:k] * hi[:k]).sum() + (w[k:] * lo[k:]).sum())
    b = float(hi[:k].sum() + lo[k:].sum())
    y = a / b
    for _ in range(m + 2):
        k_new = int(np.searchsorted(w, y, side="right"))
        k_new = min(max(k_new, 1), m - 1)
        if k_new == k:
            return y, k
        s = 1.0 if k_new > k else -1.0
        i0, i1 = (k, k_new) if k_new > k else (k_new, k)
        seg_w = (w[i0:i1] * delta[i0:i1]).sum()
        seg = delta[i0:i1].sum()
        if left:
            a += s * seg_w
            b += s * seg
        else:
            a -= s * seg_w
            b -= s * seg
        k = k_new
        y = a / b
    raise NumericalError("switch-point iteration did not settle")


def ekm_reduce(f: FiringInterval, w) -> ReducedInterval:
    """Exact COS endpoints by switch-point search over sorted consequents."""
    lower, upper, w = _validated(f, w)
    m = w.size
    if m == 1:
        one = np.ones(1, dtype=np.int8)
        return ReducedInterval(float(w[0]), float(w[0]), one, one)
    if not np.any(lower > 0.0):
        return _degenerate_interval(upper, w)
    order = np.argsort(w, kind="stable")
    ws, lo, up = w[order], lower[order], upper[order]
    y_l, k_l = _ekm_endpoint(ws, lo, up, left=True)
    y_r, k_r = _ekm_endpoint(ws, lo, up, left=False)
    z_l = np.zeros(m, dtype=np.int8)
    z_r = np.zeros(m, dtype=np.int8)
    z_l[order[:k_l]] = 1  # leading ranks use the upper band for y_l
    z_r[order[k_r:]] = 1  # trailing ranks use the upper band for y_r
    return ReducedInterval(float(y_l), float(y_r), z_l, z_r)


# --------------------------------------------------------------------------
# closed-form direct defuzzification


def nt_defuzz(f: FiringInterval, w) -> float:
    """Weighted mean of consequents under lower + upper strengths."""
    lower, upper, w = _validated(f, w)
    den = lower.sum() + upper.sum()
    if den <= 0.0:
        raise ValueError("vacuous firing: strengths sum to zero")
    return float(((lower + upper) * w).sum() / den)


# --------------------------------------------------------------------------
# sort-free sweeps


def _sc_endpoint(lower: np.ndarray, upper: np.ndarray, w: np.ndarray, left: bool):
    """Sweep rule indices flipping band assignments until a fixed point.

    The running (d1, d2) always equal the denominator/numerator of the
    closed-form output for the current assignment; a flip adjusts them by
    the rule's band gap.  Ties (w[j] exactly equal to the current output)
    keep the current assignment, which avoids oscillation.
    """
    m = w.size
    delta = upper - lower
    z = np.ones(m, dtype=np.int8)
    d1 = float(upper.sum())
    d2 = float((upper * w).sum())
    for _ in range(m + 2):
        flipped = False
        for j in range(m):
            a = w[j] * d1 - d2
            if a == 0.0:
                continue
            z_new = (1 if a < 0.0 else 0) if left else (1 if a > 0.0 else 0)
            if z_new != z[j]:
                flipped = True
                if z_new == 0:
                    d1 -= delta[j]
                    d2 -= delta[j] * w[j]
                else:
                    d1 += delta[j]
                    d2 += delta[j] * w[j]
                z[j] = z_new
        if not flipped:
            # re-evaluate the closed form at the final assignment; the
            # incremental pair can carry rounding from transient flips, and
            # the additive lower + z*delta form avoids cancellation
            u = lower + z * delta
            return float((u * w).sum() / u.sum()), z
    raise NumericalError("band-assignment sweep did not reach a fixed point")


def sc_reduce(f: FiringInterval, w) -> ReducedInterval:
    """Exact COS endpoints without sorting, via sign-driven sweeps."""
    lower, upper, w = _validated(f, w)
    m = w.size
    if m == 1:
        one = np.ones(1, dtype=np.int8)
        return ReducedInterval(float(w[0]), float(w[0]), one, one)
    if not np.any(lower > 0.0):
        return _degenerate_interval(upper, w)
    y_l, z_l = _sc_endpoint(lower, upper, w, left=True)
    y_r, z_r = _sc_endpoint(lower, upper, w, left=False)
    return ReducedInterval(float(y_l), float(y_r), z_l, z_r)


def sc_reduce_batch(lower: np.ndarray, upper: np.ndarray, w: np.ndarray):
    """Vectorized ``sc_reduce`` across rows.

    lower/upper/w are (n_samples, n_rules); returns (y_l, y_r, z_l, z_r).
    Rows whose lower band is entirely zero take the degenerate
    extreme-consequent path, matching the scalar routine.
    """
    p, m = w.shape
    y_l = np.empty(p)
    y_r = np.empty(p)
    z_l = np.ones((p, m), dtype=np.int8)
    z_r = np.ones((p, m), dtype=np.int8)
    if p == 0:
        return y_l, y_r, z_l, z_r
    if not np.all(upper.max(axis=1) > 0.0):
        raise ValueError("vacuous firing: a row has all-zero upper strengths")
    degen = ~np.any(lower > 0.0, axis=1)
    live = np.flatnonzero(~degen)
    for i in np.flatnonzero(degen):
        r = _degenerate_interval(upper[i], w[i])
        y_l[i], y_r[i], z_l[i], z_r[i] = r.y_l, r.y_r, r.z_l, r.z_r
    if live.size == 0:
        return y_l, y_r, z_l, z_r
    lo, up, ww = lower[live], upper[live], w[live]
    delta = up - lo
    for left, ys, zs in ((True, y_l, z_l), (False, y_r, z_r)):
        z = np.ones((live.size, m), dtype=np.int8)
        d1 = up.sum(axis=1)
        d2 = (up * ww).sum(axis=1)
        for _ in range(m + 2):
            any_flip = False
            for j in range(m):
                a = ww[:, j] * d1 - d2
                if left:
                    z_new = np.where(a < 0.0, 1, np.where(a > 0.0, 0, z[:, j]))
                else:
                    z_new = np.where(a > 0.0, 1, np.where(a < 0.0, 0, z[:, j]))
                flip = z_new != z[:, j]
                if flip.any():
                    any_flip = True
                    sign = np.where(z_new[flip] == 1, 1.0, -1.0)
                    d1[flip] += sign * delta[flip, j]
                    d2[flip] += sign * delta[flip, j] * ww[flip, j]
                    z[flip, j] = z_new[flip]
            if not any_flip:
                break
        else:
            raise NumericalError("band-assignment sweep did not reach a fixed point")
        u = lo + z * delta
        ys[live] = (u * ww).sum(axis=1) / u.sum(axis=1)
        zs[live] = z
    return y_l, y_r, z_l, z_r


def defuzz(r: ReducedInterval) -> float:
    """Collapse the reduced interval to its midpoint."""
    return 0.5 * (r.y_l + r.y_r)
