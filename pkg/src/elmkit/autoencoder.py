"""Randomized autoencoders and their stacking for unsupervised feature encoding.

A layer whose width differs from its input learns a ridge-regularized
reconstruction through a random orthonormal projection and encodes through
a sigmoid.  A layer of equal width takes the exact inverse path instead: a
bias-free linear projection whose recovered weights are (for full-rank
data) the transpose of the random rotation, which keeps the round trip
lossless.  Stacking feeds each layer the encoding of the previous one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elm import sigmoid
from .numerics import Rng, as_matrix, orthonormal_random, pseudo_inverse, ridge_solve, unit_row


@dataclass(frozen=True)
class Autoencoder:
    beta: np.ndarray  # n_hidden x n_inputs; encode(x) = f(x @ beta.T)
    mode: str  # compressed | equal | sparse
    activation: str  # linear for equal width, sigmoid otherwise
    c: float
    reconstruction_error: float  # relative Frobenius error on the training batch
    beta_orthogonality_gap: float  # max |beta' beta - I|; diagnostic, not enforced

    @property
    def n_inputs(self) -> int:
        return self.beta.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.beta.shape[0]


def ae_train(x, n_hidden: int, c: float, rng: Rng) -> Autoencoder:
    """Fit one autoencoder layer on x.

    Width != input: h = sigmoid(x a + b) with column-orthonormal a and a
    unit-norm bias row, beta solved by ridge against x.  Width == input:
    h = x a with square orthogonal a (no bias, no squashing) and beta
    recovered through the pseudo-inverse, so h @ beta reproduces x exactly
    whenever x has full column rank.
    """
    x = as_matrix(x, "x")
    if n_hidden < 1:
        raise ValueError("n_hidden must be >= 1")
    n_in = x.shape[1]
    if n_hidden == n_in:
        a = orthonormal_random(n_in, n_in, rng.split(0))
        h = x @ a
        beta = pseudo_inverse(h) @ x
        mode, activation = "equal", "linear"
    else:
        if n_hidden < n_in:
            a = orthonormal_random(n_in, n_hidden, rng.split(0))
            mode = "compressed"
        else:
            a = orthonormal_random(n_hidden, n_in, rng.split(0)).T
            mode = "sparse"
        b = unit_row(n_hidden, rng.split(1))
        h = sigmoid(x @ a + b)
        beta = ridge_solve(h, x, c)
        activation = "sigmoid"
    x_norm = np.linalg.norm(x)
    recon_err = float(np.linalg.norm(h @ beta - x) / x_norm) if x_norm > 0 else 0.0
    gap = float(np.abs(beta.T @ beta - np.eye(n_in)).max())
    return Autoencoder(beta, mode, activation, float(c), recon_err, gap)


def ae_encode(ae: Autoencoder, x) -> np.ndarray:
    """Project x through the learned weights: f(x @ beta.T)."""
    x = as_matrix(x, "x", min_rows=0)
    if x.shape[1] != ae.n_inputs:
        raise ValueError(f"feature mismatch: layer expects {ae.n_inputs}, got {x.shape[1]}")
    z = x @ ae.beta.T
    return sigmoid(z) if ae.activation == "sigmoid" else z


@dataclass(frozen=True)
class FeatureStack:
    layers: tuple[Autoencoder, ...]

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        """[n_inputs, width_1, ..., width_L]."""
        return (self.layers[0].n_inputs,) + tuple(ae.n_hidden for ae in self.layers)

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].n_hidden


def stack_train(x, layer_sizes, cs, rng: Rng) -> FeatureStack:
    """Train layer s on the encoding produced by layers 1..s-1."""
    layer_sizes = [int(m) for m in layer_sizes]
    cs = [float(c) for c in cs]
    if not layer_sizes:
        raise ValueError("layer_sizes must name at least one layer")
    if len(layer_sizes) != len(cs):
        raise ValueError(
            f"need one c per layer: {len(layer_sizes)} layers, {len(cs)} cs"
        )
    cur = as_matrix(x, "x")
    layers = []
    for s, (m, c) in enumerate(zip(layer_sizes, cs)):
        ae = ae_train(cur, m, c, rng.split(s))
        layers.append(ae)
        cur = ae_encode(ae, cur)
    return FeatureStack(tuple(layers))


def stack_transform(stack: FeatureStack, x) -> np.ndarray:
    """Run x through every layer; pure, row-wise independent."""
    cur = as_matrix(x, "x", min_rows=0)
    for ae in stack.layers:
        cur = ae_encode(ae, cur)
    return cur
