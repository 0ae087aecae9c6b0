"""Interval type-2 TSK classifier trained by ridge regression in two passes.

Antecedents are random Gaussians with an uncertain width (never tuned);
each rule's consequent is linear in the inputs with a bias term.  Training
first solves the consequents against hidden rows built from the closed-form
reduction weights, then re-solves each output column against rows rebuilt
from the converged endpoint assignments of the sort-free reducer.  Both
passes share one ridge constant, so a collapsed width interval makes the
second pass reproduce the first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import NumericalError, Rng, as_matrix, _solve_spd
from .type_reduction import (
    It2RuleBase,
    ekm_reduce,
    FiringInterval,
    firing_batch,
    sc_reduce_batch,
)

STAGE_INITIALIZED = "initialized"
STAGE_REFINED = "refined"


@dataclass(frozen=True)
class Sit2Model:
    rules: It2RuleBase
    consequents: np.ndarray  # ((n_inputs + 1) * n_rules) x n_outputs
    stage: str

    @property
    def n_rules(self) -> int:
        return self.rules.n_rules

    @property
    def n_inputs(self) -> int:
        return self.rules.n_inputs

    @property
    def n_outputs(self) -> int:
        return self.consequents.shape[1]


def _with_bias(x: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((x.shape[0], 1)), x])


def _consequent_values(xb: np.ndarray, q_col: np.ndarray, n_rules: int) -> np.ndarray:
    """Per-rule linear outputs w_j(x) = q_j0 + q_j . x for one output column."""
    return xb @ q_col.reshape(n_rules, -1).T


_BLOCK_ENTRIES = 2_000_000  # cap on materialized hidden-row entries per block


def _product_ridge(phi, xb, t, c, xxt=None):
    """Ridge solve for hidden rows h_p = kron(phi_p, xb_p) without forming them.

    Tall systems accumulate the primal Gram over row blocks.  Wide systems
    exploit h_p . h_q = (phi_p . phi_q)(xb_p . xb_q): the dual Gram is the
    elementwise product of the two small Grams, and the weights fold back
    rule by rule.  ``xxt`` lets callers share xb @ xb.T across solves.
    """
    p, m_rules = phi.shape
    k = xb.shape[1]
    m = m_rules * k
    if m <= p:
        block = max(1, _BLOCK_ENTRIES // m)
        gram = np.zeros((m, m))
        rhs = np.zeros((m, t.shape[1]))
        for s in range(0, p, block):
            h = (phi[s : s + block, :, None] * xb[s : s + block, None, :]).reshape(-1, m)
            gram += h.T @ h
            rhs += h.T @ t[s : s + block]
        b = _solve_spd(gram, rhs, c)
    else:
        gram = phi @ phi.T
        gram *= xxt if xxt is not None else xb @ xb.T
        alpha = _solve_spd(gram, t, c)
        b = np.empty((m, t.shape[1]))
        for j in range(m_rules):
            b[j * k : (j + 1) * k] = (phi[:, j : j + 1] * xb).T @ alpha
    if not np.all(np.isfinite(b)):
        raise NumericalError("consequent solution contains non-finite entries")
    return np.ascontiguousarray(b)


def _refinement_weights(lower, upper, z_l, z_r):
    """Hidden-row weights from the endpoint assignments, halved.

    Each branch normalizes the band mix that attains one endpoint; their
    half-sum makes a trained consequent predict the interval midpoint.
    """
    delta = upper - lower
    u_l = lower + z_l * delta
    u_r = lower + z_r * delta
    return 0.5 * (u_l / u_l.sum(axis=1, keepdims=True) + u_r / u_r.sum(axis=1, keepdims=True))


def sit2_train(
    x,
    t,
    n_rules: int,
    rng: Rng,
    c: float = 1e6,
    width_scale_range: tuple[float, float] = (0.5, 1.5),
    width_ratio_range: tuple[float, float] = (0.6, 0.95),
    refine: bool = True,
) -> Sit2Model:
    """Fit the classifier on one-hot targets t.

    Centers are uniform over each feature's observed range; upper widths are
    uniform in ``width_scale_range`` times half the mean feature range, and
    lower widths are the upper ones shrunk by a ratio from
    ``width_ratio_range``.  Passing a degenerate ratio range (1, 1) collapses
    the width interval, making the model a plain type-1 TSK system.
    """
    x = as_matrix(x, "x")
    t = as_matrix(t, "t")
    if x.shape[0] != t.shape[0]:
        raise ValueError(f"row mismatch: x has {x.shape[0]} rows, t has {t.shape[0]}")
    if t.shape[1] < 2:
        raise ValueError("need >= 2 classes: target matrix has a single column")
    if n_rules < 2:
        raise ValueError("n_rules must be >= 2")
    gen = rng.generator()
    fmin = x.min(axis=0)
    fmax = x.max(axis=0)
    centers = gen.uniform(fmin, fmax, size=(n_rules, x.shape[1]))
    half_span = float((fmax - fmin).mean()) / 2.0
    if half_span <= 0.0:
        half_span = 0.5  # all-constant features; any positive width works
    # widths grow with sqrt(dim): the squared distance in the Gaussian
    # exponent sums over every input, and without this factor the firing
    # of all but the nearest rule underflows on wide feature vectors
    half_span *= float(np.sqrt(x.shape[1]))
    sigma_upper = gen.uniform(
        width_scale_range[0] * half_span, width_scale_range[1] * half_span, n_rules
    )
    sigma_lower = gen.uniform(*width_ratio_range, size=n_rules) * sigma_upper
    rules = It2RuleBase(centers, sigma_lower, sigma_upper)

    lower, upper, _ = firing_batch(rules, x)
    xb = _with_bias(x)
    both = lower + upper
    phi0 = both / both.sum(axis=1, keepdims=True)
    # the dual-path Gram of the input part is shared by every solve below
    xxt = xb @ xb.T if n_rules * xb.shape[1] > x.shape[0] else None
    q = _product_ridge(phi0, xb, t, c, xxt)
    if not refine:
        return Sit2Model(rules, q, STAGE_INITIALIZED)

    q_ref = np.empty_like(q)
    for i in range(t.shape[1]):
        w = _consequent_values(xb, q[:, i], n_rules)
        _, _, z_l, z_r = sc_reduce_batch(lower, upper, w)
        phi = _refinement_weights(lower, upper, z_l, z_r)
        q_ref[:, i] = _product_ridge(phi, xb, t[:, i : i + 1], c, xxt)[:, 0]
    return Sit2Model(rules, q_ref, STAGE_REFINED)


def sit2_predict(model: Sit2Model, x, reducer: str = "sc") -> np.ndarray:
    """Score matrix: per output, the midpoint of the reduced interval.

    ``reducer`` selects the endpoint algorithm ("sc" or "ekm"); both compute
    the same interval, so swapping them is a consistency check, not a knob.
    """
    x = as_matrix(x, "x", min_rows=0)
    if x.shape[1] != model.n_inputs:
        raise ValueError(f"feature mismatch: model expects {model.n_inputs}, got {x.shape[1]}")
    if reducer not in ("sc", "ekm"):
        raise ValueError(f"unknown reducer {reducer!r}")
    lower, upper, _ = firing_batch(model.rules, x)
    xb = _with_bias(x)
    scores = np.empty((x.shape[0], model.n_outputs))
    for i in range(model.n_outputs):
        w = _consequent_values(xb, model.consequents[:, i], model.n_rules)
        if reducer == "sc":
            y_l, y_r, _, _ = sc_reduce_batch(lower, upper, w)
            scores[:, i] = 0.5 * (y_l + y_r)
        else:
            for p in range(x.shape[0]):
                r = ekm_reduce(FiringInterval(lower[p], upper[p]), w[p])
                scores[p, i] = 0.5 * (r.y_l + r.y_r)
    return scores
