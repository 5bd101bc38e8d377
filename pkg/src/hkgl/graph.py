"""Gaussian affinity, alpha-normalization and the graph Laplacian L = (A - I)/eps^2."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DomainError


class ScheduleMode(str, Enum):
    """Bandwidth schedules eps = c * (log n / n)^(1/exponent)."""

    EIG_PAIR_NORMALIZED = "eig"
    EIG_VEC_NORMALIZED = "vec"
    UNNORMALIZED_EIG = "un-eig"
    UNNORMALIZED_VEC = "un-vec"
    FIXED = "fixed"

    def exponent(self, d):
        return {
            ScheduleMode.EIG_PAIR_NORMALIZED: 4 * d + 13,
            ScheduleMode.EIG_VEC_NORMALIZED: 4 * d + 8,
            ScheduleMode.UNNORMALIZED_EIG: 2 * d + 12,
            ScheduleMode.UNNORMALIZED_VEC: 2 * d + 8,
        }[self]


def epsilon_schedule(n, d, mode, multiplier=1.0, value=None):
    """Bandwidth for ``n`` samples of a ``d``-dimensional manifold.

    ``mode`` is a :class:`ScheduleMode` (or its string value). For
    ``ScheduleMode.FIXED`` the given ``value`` is returned unchanged.
    """
    mode = ScheduleMode(mode)
    if mode is ScheduleMode.FIXED:
        if value is None or not value > 0:
            raise DomainError(f"fixed bandwidth must be positive, got {value}")
        return float(value)
    if n < 3:
        raise DomainError(f"epsilon schedule needs n >= 3, got {n}")
    if not multiplier > 0:
        raise DomainError(f"epsilon multiplier must be positive, got {multiplier}")
    return float(multiplier * (math.log(n) / n) ** (1.0 / mode.exponent(d)))


@dataclass(frozen=True)
class KernelConfig:
    epsilon: float
    alpha: int = 1

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if self.alpha not in (0, 1):
            raise ConfigError(f"alpha must be 0 or 1, got {self.alpha}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "alpha", int(self.alpha))


def _points(cloud):
    return np.asarray(getattr(cloud, "points", cloud), dtype=float)


def gaussian_affinity(cloud, epsilon):
    """Dense kernel matrix exp(-|x_i - x_j|^2 / (4 eps^2)), no thresholding."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    x = _points(cloud)
    return np.exp(-cdist(x, x, "sqeuclidean") / (4.0 * epsilon**2))


def degree(kernel_matrix):
    """Row sums q_i = sum_j k(x_i, x_j), self-term included."""
    return np.asarray(kernel_matrix).sum(axis=1)


def alpha_normalize(kernel_matrix, q, alpha):
    if alpha == 0:
        return kernel_matrix
    q = np.asarray(q, dtype=float)
    assert np.all(q > 0), "degrees must be strictly positive"
    qa = q**alpha
    return kernel_matrix / np.outer(qa, qa)


@dataclass(frozen=True, eq=False)
class GraphOperators:
    """Kernel matrix, degrees and the alpha-normalized affinity of one cloud.

    ``A`` and ``L`` are built on access; the symmetric conjugate ``A_sym`` is
    what the eigensolver uses.
    """

    kernel_matrix: np.ndarray
    q: np.ndarray
    W: np.ndarray
    D_diag: np.ndarray
    config: KernelConfig

    @property
    def n(self):
        return self.kernel_matrix.shape[0]

    @property
    def epsilon(self):
        return self.config.epsilon

    @property
    def alpha(self):
        return self.config.alpha

    @property
    def A(self):
        return self.W / self.D_diag[:, None]

    @property
    def L(self):
        return (self.A - np.eye(self.n)) / self.epsilon**2

    @property
    def A_sym(self):
        s = 1.0 / np.sqrt(self.D_diag)
        return self.W * np.outer(s, s)

    def apply_L(self, f):
        """L @ f without forming the dense L."""
        f = np.asarray(f, dtype=float)
        af = (self.W @ f) / (self.D_diag if f.ndim == 1 else self.D_diag[:, None])
        return (af - f) / self.epsilon**2


def build_operators(cloud, config: KernelConfig) -> GraphOperators:
    k = gaussian_affinity(cloud, config.epsilon)
    q = degree(k)
    w = alpha_normalize(k, q, config.alpha)
    d = w.sum(axis=1)
    for arr in (k, q, w, d):
        arr.setflags(write=False)
    return GraphOperators(k, q, w, d, config)


def operators_from_kernel(kernel_matrix, q, config: KernelConfig) -> GraphOperators:
    """Rebuild operators from a stored kernel matrix and degree vector."""
    w = alpha_normalize(kernel_matrix, q, config.alpha)
    return GraphOperators(kernel_matrix, q, w, w.sum(axis=1), config)
