"""Heat kernel estimate sum_{l<K} exp(-mu_l t) v_l v_l^T and its diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleTimeError, NonPositiveEntryError, UnsupportedError
from .geometry import Manifold

MAX_TRUNCATION = 10**6
POSITIVITY_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class HeatKernelEstimate:
    H: np.ndarray
    K: int
    t: float
    epsilon: float | None = None
    alpha: int | None = None

    @property
    def n(self):
        return self.H.shape[0]


def _vectors(nv):
    return np.asarray(getattr(nv, "v", nv), dtype=float)


def _check(v, mu, K, t):
    K = int(K)
    if K < 1:
        raise DomainError(f"truncation K must be >= 1, got {K}")
    if K > v.shape[1] or K > len(mu):
        raise DomainError(f"K={K} exceeds the {min(v.shape[1], len(mu))} available eigenpairs")
    if not t > 0:
        raise DomainError(f"diffusion time must be positive, got t={t}")
    return K


def heat_kernel_matrix(nv, mu, K, t, epsilon=None, alpha=None) -> HeatKernelEstimate:
    v = _vectors(nv)
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    K = _check(v, mu, K, t)
    b = v[:, :K] * np.exp(-0.5 * mu[:K] * t)
    h = b @ b.T
    h = 0.5 * (h + h.T)
    h.setflags(write=False)
    return HeatKernelEstimate(h, K, float(t), epsilon, alpha)


def heat_kernel_entry(nv, mu, K, t, i, j):
    """Single entry of the estimate without forming the n x n matrix."""
    v = _vectors(nv)
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    K = _check(v, mu, K, t)
    n = v.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise DomainError(f"indices ({i}, {j}) out of range for n={n}")
    return float(np.dot(np.exp(-mu[:K] * t), v[i, :K] * v[j, :K]))


def suggest_truncation(t, d, C=1.0):
    """Smallest K >= 2 with C log K / K^(2/d) <= t."""
    if not t > 0:
        raise DomainError(f"diffusion time must be positive, got t={t}")
    if not C > 0:
        raise DomainError(f"constant C must be positive, got {C}")
    ks = np.arange(2, MAX_TRUNCATION + 1, dtype=float)
    ok = np.nonzero(C * np.log(ks) / ks ** (2.0 / d) <= t)[0]
    if ok.size == 0:
        raise InfeasibleTimeError(f"no truncation K <= {MAX_TRUNCATION} satisfies "
                                  f"C log K / K^(2/d) <= t for t={t}, d={d}, C={C}")
    return int(ks[ok[0]])


def oracle_heat_matrix(cloud, t):
    manifold = cloud.manifold
    if not isinstance(manifold, Manifold):
        raise UnsupportedError(f"no analytic heat kernel for {manifold!r}")
    c = cloud.intrinsic_coords
    return np.asarray(manifold.heat_kernel(c[:, None, :], c[None, :, :], t))


def sup_error_vs_oracle(est: HeatKernelEstimate, cloud, t=None, oracle=None):
    """(max |H - H_true|, that value over max |H_true|) across all sample pairs."""
    t = est.t if t is None else t
    if oracle is None:
        oracle = oracle_heat_matrix(cloud, t)
    sup_abs = float(np.max(np.abs(est.H - oracle)))
    return sup_abs, sup_abs / float(np.max(np.abs(oracle)))


@dataclass(frozen=True)
class VaradhanProbe:
    estimate: float
    t_used: float
    trace: tuple  # (t, H, -4 t log H) for every probed time, nan where H <= floor


def varadhan_probe(entry, t_list, floor=POSITIVITY_FLOOR) -> VaradhanProbe:
    """-4 t log H(t) at the smallest probed t whose heat value exceeds ``floor``.

    ``entry`` maps a diffusion time to a heat kernel value.
    """
    t_list = [float(t) for t in t_list]
    if not t_list or any(t <= 0 for t in t_list):
        raise DomainError("t_list must hold positive diffusion times")
    if any(b >= a for a, b in zip(t_list, t_list[1:])):
        raise DomainError("t_list must be strictly descending")
    trace, best = [], None
    for t in t_list:
        h = float(entry(t))
        g = -4.0 * t * math.log(h) if h > floor else math.nan
        trace.append((t, h, g))
        if h > floor:
            best = (g, t)
    if best is None:
        raise NonPositiveEntryError(
            "every probed heat value is below the positivity floor; "
            "increase K or the probed times")
    return VaradhanProbe(best[0], best[1], tuple(trace))


def varadhan_geodesic(nv, mu, K, i, j, t_list) -> VaradhanProbe:
    """Squared geodesic distance between samples i and j from the heat estimate."""
    return varadhan_probe(lambda t: heat_kernel_entry(nv, mu, K, t, i, j), t_list)
