"""Ball-count density estimate and the l2(1/p_hat) eigenvector normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gamma

from .errors import DomainError

_BLOCK = 1024


@dataclass(frozen=True, eq=False)
class BallCounts:
    N: np.ndarray
    epsilon: float


@dataclass(frozen=True, eq=False)
class NormalizedEigenvectors:
    v: np.ndarray
    norms: np.ndarray


def ball_counts(cloud, epsilon) -> BallCounts:
    """N(i) = #{j : |x_i - x_j| < eps}, the point itself included (open ball)."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(getattr(cloud, "points", cloud), dtype=float)
    n = x.shape[0]
    counts = np.empty(n, dtype=np.int64)
    for start in range(0, n, _BLOCK):
        block = cdist(x[start:start + _BLOCK], x)
        counts[start:start + _BLOCK] = np.count_nonzero(block < epsilon, axis=1)
    counts.setflags(write=False)
    return BallCounts(counts, float(epsilon))


def unit_sphere_area(d: int) -> float:
    """Surface measure of S^{d-1} in R^d."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    d = int(d)
    table = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi, 4: 2.0 * math.pi**2}
    if d in table:
        return table[d]
    return float(2.0 * math.pi ** (d / 2.0) / gamma(d / 2.0))


def kde(counts: BallCounts, n, d, epsilon=None):
    """p_hat_j = d N(j) / (|S^{d-1}| n eps^d)."""
    eps = counts.epsilon if epsilon is None else epsilon
    return d * counts.N / (unit_sphere_area(d) * n * eps**d)


def weighted_l2_norm(vtilde_col, counts: BallCounts, d, epsilon=None):
    eps = counts.epsilon if epsilon is None else epsilon
    v = np.asarray(vtilde_col, dtype=float)
    scale = unit_sphere_area(d) * eps**d / d
    return math.sqrt(scale * float(np.sum(v * v / counts.N)))


def renormalize(decomp, counts: BallCounts, d) -> NormalizedEigenvectors:
    """Divide every eigenvector column by its l2(1/p_hat) norm."""
    vt = decomp.vtilde
    scale = unit_sphere_area(d) * counts.epsilon**d / d
    norms = np.sqrt(scale * np.sum(vt * vt / counts.N[:, None], axis=0))
    assert np.all(norms > 0), "zero weighted norm for a nonzero eigenvector"
    v = vt / norms
    v.setflags(write=False)
    return NormalizedEigenvectors(v, norms)
