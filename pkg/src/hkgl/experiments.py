"""Convergence sweeps over n, log-log rate fits and the pointwise Laplacian check."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .density import ball_counts, renormalize
from .errors import DomainError, HKGLError
from .geometry import analytic_eigenvalues, eigenspace_partition, sample
from .graph import KernelConfig, ScheduleMode, build_operators, epsilon_schedule
from .heat import heat_kernel_matrix, oracle_heat_matrix, sup_error_vs_oracle
from .spectral import eigendecompose, subspace_residual

log = logging.getLogger(__name__)

_MASK = (1 << 64) - 1
# splitmix64 increment (golden ratio); per-n seeds are splitmix64(splitmix64(base ^ n) ^ repeat)
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(base: int, n: int, repeat: int = 0) -> int:
    return splitmix64(splitmix64((int(base) ^ int(n)) & _MASK) ^ int(repeat))


@dataclass
class Pipeline:
    """Every intermediate of one sample -> operators -> eigenpairs -> normalization pass."""

    cloud: object
    ops: object
    decomp: object
    counts: object
    nv: object

    @property
    def epsilon(self):
        return self.ops.epsilon


def run_pipeline(cloud, epsilon, alpha, K) -> Pipeline:
    ops = build_operators(cloud, KernelConfig(epsilon, alpha))
    decomp = eigendecompose(ops, K)
    counts = ball_counts(cloud, epsilon)
    nv = renormalize(decomp, counts, cloud.intrinsic_dim)
    return Pipeline(cloud, ops, decomp, counts, nv)


def eigenvalue_errors(mu, manifold):
    """|mu_i - lambda_i| with both sequences sorted ascending (multiplicity-aware)."""
    mu = np.asarray(mu)
    return np.abs(mu - analytic_eigenvalues(manifold, mu.size))


def eigenspace_residuals(nv, cloud, K):
    """Per complete eigenspace, the worst sup residual of its renormalized eigenvectors."""
    v = getattr(nv, "v", nv)
    out = []
    for space, idx in eigenspace_partition(cloud.manifold, K):
        basis = space.basis(cloud.intrinsic_coords)
        out.append(max(subspace_residual(v[:, i], basis) for i in idx))
    return np.array(out)


def pointwise_check(cloud, ops, f, laplacian_f):
    """max_i |(L f)(x_i) - (Delta f)(x_i)| for a smooth test function f."""
    coords = cloud.intrinsic_coords
    fx = np.asarray(f(coords), dtype=float)
    return float(np.max(np.abs(ops.apply_L(fx) - np.asarray(laplacian_f(coords)))))


@dataclass
class ConvergenceRecord:
    n: int
    epsilon: float
    alpha: int
    eigenvalue_errors: np.ndarray
    eigenvector_residuals: np.ndarray
    heat_sup_error: tuple
    wall_time_seconds: float
    mu: np.ndarray = field(default=None, repr=False)

    def metrics(self):
        """Flat (metric, index, value) rows."""
        rows = [("mu", i, float(x)) for i, x in enumerate(self.mu)]
        rows += [("eigenvalue_error", i, float(x)) for i, x in enumerate(self.eigenvalue_errors)]
        rows += [("eigenvector_residual", i, float(x))
                 for i, x in enumerate(self.eigenvector_residuals)]
        rows += [("heat_sup_abs", 0, float(self.heat_sup_error[0])),
                 ("heat_sup_rel", 0, float(self.heat_sup_error[1])),
                 ("wall_time_seconds", 0, float(self.wall_time_seconds))]
        return rows


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple


def fit_loglog_slope(pairs) -> RateFit:
    """Least-squares line through (log eps, log error)."""
    pairs = [(float(e), float(v)) for e, v in pairs]
    if len(pairs) < 3:
        raise DomainError(f"a rate fit needs at least 3 points, got {len(pairs)}")
    if any(not (e > 0 and v > 0) for e, v in pairs):
        raise DomainError("rate fit needs strictly positive epsilons and errors")
    x = np.log([e for e, _ in pairs])
    y = np.log([v for _, v in pairs])
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0:
        raise DomainError("rate fit needs at least two distinct epsilons")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    r2 = 0.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(slope, intercept, r2, tuple(zip(x.tolist(), y.tolist())))


# summary statistic per record that the rate fits are computed on
FIT_METRICS = {
    "eigenvalue_error": lambda r: float(np.mean(r.eigenvalue_errors[1:])),
    "eigenvector_residual": lambda r: float(np.max(r.eigenvector_residuals)),
    "heat_sup_abs": lambda r: float(r.heat_sup_error[0]),
}


@dataclass
class ConvergenceResult:
    records: list
    fits: dict

    def series(self, metric):
        return [FIT_METRICS[metric](r) for r in self.records]


def convergence_run(manifold, density, ns, alpha=1, schedule_mode=ScheduleMode.EIG_PAIR_NORMALIZED,
                    c=1.0, K=5, t=0.5, seed=0, repeats=1, epsilon=None) -> ConvergenceResult:
    """Sample, build, decompose and compare against the oracle for every n.

    With ``repeats > 1`` each n is run on that many independent clouds and the
    errors are averaged.
    """
    ns = [int(n) for n in ns]
    if len(ns) < 3:
        raise DomainError(f"a convergence run needs at least 3 sample sizes, got {len(ns)}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("sample sizes must be strictly ascending")
    if int(K) < 2 or int(K) > 25:
        raise DomainError(f"K must lie in [2, 25], got {K}")
    if int(repeats) < 1:
        raise DomainError(f"repeats must be >= 1, got {repeats}")
    d = manifold.intrinsic_dim
    records = []
    for n in ns:
        eps = epsilon_schedule(n, d, schedule_mode, c, value=epsilon)
        start = time.perf_counter()
        acc = []
        try:
            for r in range(int(repeats)):
                cloud = sample(manifold, n, density, derive_seed(seed, n, r))
                p = run_pipeline(cloud, eps, alpha, K)
                est = heat_kernel_matrix(p.nv, p.decomp.mu, K, t)
                sup = sup_error_vs_oracle(est, cloud, t, oracle_heat_matrix(cloud, t))
                acc.append((p.decomp.mu, eigenvalue_errors(p.decomp.mu, manifold),
                            eigenspace_residuals(p.nv, cloud, K), np.array(sup)))
        except HKGLError as exc:
            raise type(exc)(f"n={n}: {exc}") from exc
        mean = [np.mean([a[k] for a in acc], axis=0) for k in range(4)]
        rec = ConvergenceRecord(n, eps, int(alpha), mean[1], mean[2], tuple(mean[3].tolist()),
                                time.perf_counter() - start, mean[0])
        log.info("n=%d eps=%.4f eig_err=%s", n, eps, np.round(rec.eigenvalue_errors, 4))
        records.append(rec)
    fits = {}
    for metric, stat in FIT_METRICS.items():
        try:
            fits[metric] = fit_loglog_slope([(r.epsilon, stat(r)) for r in records])
        except DomainError:
            fits[metric] = None
    return ConvergenceResult(records, fits)
