"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible without ``-s``) and then
asserts. Calibrated settings are frozen in ``C_MULT``, ``SEED`` and ``REPEATS``.
"""

import math

import numpy as np
import pytest

from hkgl.experiments import convergence_run, derive_seed, pointwise_check, run_pipeline
from hkgl.geometry import (Circle, CosinePerturbed, FlatTorus, Sphere, Uniform,
                           circle_heat_spectral, circle_heat_wrapped, sample)
from hkgl.graph import KernelConfig, ScheduleMode, build_operators, epsilon_schedule
from hkgl.heat import (heat_kernel_matrix, oracle_heat_matrix, sup_error_vs_oracle,
                       varadhan_geodesic, varadhan_probe)
from hkgl.spectral import eigendecompose, nystrom_extend

# frozen after one calibration sweep (scripts/calibrate.py)
C_MULT = 0.07
SEED = 0
REPEATS = 4
NS = [500, 1000, 2000, 4000]
T_LIST = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01]

# calibration run of criterion 5 gave sup_rel = 0.0164; threshold stays at 0.05
HEAT_REL_TOL = 0.05


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def sweep_alpha1():
    return convergence_run(Circle(1.0), Uniform(), NS, alpha=1, c=C_MULT, K=5, t=0.5,
                           seed=SEED, repeats=REPEATS)


@pytest.fixture(scope="module")
def sweep_alpha0():
    return convergence_run(Circle(1.0), Uniform(), NS, alpha=0, c=C_MULT, K=5, t=0.5,
                           seed=SEED, repeats=REPEATS,
                           schedule_mode=ScheduleMode.UNNORMALIZED_EIG)


@pytest.fixture(scope="module")
def circle2000():
    n = 2000
    cloud = sample(Circle(1.0), n, Uniform(), derive_seed(SEED, n))
    return run_pipeline(cloud, epsilon_schedule(n, 1, "eig", C_MULT), 1, 21)


def test_criterion_01_structural_invariants(report):
    rng = np.random.default_rng(SEED)
    worst = dict(rowsum=0.0, ev_lo=0.0, ev_hi=0.0, const=0.0, sym=0.0, psd=0.0)
    mu0_ok = True
    for manifold in (Circle(1.0), Sphere(1.0), FlatTorus(1.0, 0.5)):
        for alpha in (0, 1):
            for _ in range(2):
                n = int(rng.integers(20, 201))
                cloud = sample(manifold, n, Uniform(), int(rng.integers(2**32)))
                ops = build_operators(cloud, KernelConfig(float(rng.uniform(0.2, 0.6)), alpha))
                worst["rowsum"] = max(worst["rowsum"], np.max(np.abs(ops.A.sum(axis=1) - 1)))
                ev = np.linalg.eigvalsh(ops.A_sym)
                worst["ev_lo"] = max(worst["ev_lo"], -ev.min())
                worst["ev_hi"] = max(worst["ev_hi"], ev.max() - 1)
                K = 8
                p = run_pipeline(cloud, ops.epsilon, alpha, K)
                mu0_ok &= p.decomp.mu[0] == 0.0
                v0 = p.decomp.vtilde[:, 0]
                worst["const"] = max(worst["const"], np.ptp(v0))
                H = heat_kernel_matrix(p.nv, p.decomp.mu, K, float(rng.uniform(0.05, 2))).H
                scale = np.max(np.abs(H))
                worst["sym"] = max(worst["sym"], np.max(np.abs(H - H.T)) / scale)
                worst["psd"] = max(worst["psd"], -np.linalg.eigvalsh(H).min() / scale)
    ok = (worst["rowsum"] <= 1e-12 and worst["ev_lo"] <= 1e-10 and worst["ev_hi"] <= 1e-10
          and mu0_ok and worst["const"] <= 1e-10 and worst["sym"] <= 1e-10 and worst["psd"] <= 1e-10)
    report(1, ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f", mu0_zero={mu0_ok}")


def _brute_force(points, eps, alpha):
    n = len(points)
    k = [[math.exp(-sum((a - b) ** 2 for a, b in zip(points[i], points[j])) / (4 * eps * eps))
          for j in range(n)] for i in range(n)]
    q = [sum(row) for row in k]
    w = [[k[i][j] / (q[i] * q[j]) ** alpha for j in range(n)] for i in range(n)]
    d = [sum(row) for row in w]
    a = [[w[i][j] / d[i] for j in range(n)] for i in range(n)]
    lap = [[(a[i][j] - (1.0 if i == j else 0.0)) / (eps * eps) for j in range(n)] for i in range(n)]
    return np.array(w), np.array(a), np.array(lap)


def test_criterion_02_small_instance_oracle(report):
    worst_entry, worst_eig = 0.0, 0.0
    for n, manifold, alpha, eps in [(2, Circle(1.0), 1, 0.5), (5, Sphere(1.0), 0, 0.7),
                                    (8, FlatTorus(1.0, 0.5), 1, 0.6), (8, Circle(2.0), 0, 0.9)]:
        cloud = sample(manifold, n, Uniform(), seed=n)
        ops = build_operators(cloud, KernelConfig(eps, alpha))
        w, a, lap = _brute_force(cloud.points.tolist(), eps, alpha)
        worst_entry = max(worst_entry, np.max(np.abs(ops.W - w)), np.max(np.abs(ops.A - a)),
                          np.max(np.abs(ops.L - lap)) * eps * eps)
        ev = np.sort(np.linalg.eigvals(a).real)[::-1]
        worst_eig = max(worst_eig, np.max(np.abs(eigendecompose(ops, n).sigma - ev)))
    ok = worst_entry <= 1e-13 and worst_eig <= 1e-8
    report(2, ok, f"entrywise={worst_entry:.1e} (tol 1e-13), eigenvalues={worst_eig:.1e} (tol 1e-8)")


def test_criterion_03_eigenvalue_convergence(report, sweep_alpha1):
    errs = np.array([r.eigenvalue_errors[1:5] for r in sweep_alpha1.records])
    decreasing = bool(np.all(np.diff(errs, axis=0) < 0))
    mu1 = errs[-1, 0]
    ok = decreasing and mu1 < 0.1
    report(3, ok, f"strictly decreasing={decreasing}, |mu1-1|@4000={mu1:.4f} (< 0.1), "
                  f"errors={np.round(errs, 4).tolist()}")


def test_criterion_04_rate_slopes(report, sweep_alpha1, sweep_alpha0):
    s1 = sweep_alpha1.fits["eigenvalue_error"].slope
    s0 = sweep_alpha0.fits["eigenvalue_error"].slope
    vec = sweep_alpha1.series("eigenvector_residual")
    vec_mono = bool(np.all(np.diff(vec) < 0))
    ok = s1 >= 0.75 and s0 >= 1.0 and vec_mono
    report(4, ok, f"slope alpha=1 {s1:.2f} (>= 0.75), alpha=0 {s0:.2f} (>= 1.0), "
                  f"eigvec residual decreasing={vec_mono} {np.round(vec, 4).tolist()}")


def test_criterion_05_heat_kernel_reproduction(report, circle2000):
    p = circle2000
    err = {}
    for K, t in [(5, 0.5), (21, 0.5), (21, 2.0)]:
        est = heat_kernel_matrix(p.nv, p.decomp.mu, K, t)
        err[K, t] = sup_error_vs_oracle(est, p.cloud, t, oracle_heat_matrix(p.cloud, t))
    rel = err[21, 0.5][1]
    shape_k = err[21, 0.5][0] < err[5, 0.5][0]
    shape_t = err[21, 2.0][0] < err[21, 0.5][0]
    ok = rel < HEAT_REL_TOL and shape_k and shape_t
    report(5, ok, f"sup_rel={rel:.4f} (< {HEAT_REL_TOL}), sup_abs K=5/21 at t=0.5: "
                  f"{err[5, 0.5][0]:.5f}/{err[21, 0.5][0]:.5f}, K=21 t=2: {err[21, 2.0][0]:.5f}")


def test_criterion_06_density_invariance(report):
    n = 4000
    cloud = sample(Circle(1.0), n, CosinePerturbed(0.5), derive_seed(SEED, n))
    eps = epsilon_schedule(n, 1, "eig", C_MULT)
    gap = {a: abs(run_pipeline(cloud, eps, a, 3).decomp.mu[1] - 1) for a in (0, 1)}
    ok = gap[1] <= 0.5 * gap[0]
    report(6, ok, f"|mu1-1| alpha=1 {gap[1]:.4f}, alpha=0 {gap[0]:.4f} (ratio <= 0.5)")


def test_criterion_07_pointwise(report):
    dev = {}
    for n in (500, 4000):
        cloud = sample(Circle(1.0), n, Uniform(), derive_seed(SEED, n))
        ops = build_operators(cloud, KernelConfig(epsilon_schedule(n, 1, "eig", C_MULT), 1))
        dev[n] = pointwise_check(cloud, ops, lambda x: np.cos(x[:, 0]), lambda x: -np.cos(x[:, 0]))
    ok = dev[4000] < dev[500]
    report(7, ok, f"max deviation n=500 {dev[500]:.4f}, n=4000 {dev[4000]:.4f}")


def test_criterion_08_oracle_self_consistency(report):
    gap = 0.0
    for t in (0.05, 0.1, 0.5, 2.0):
        delta = np.array([0.0, 0.5, math.pi])
        gap = max(gap, np.max(np.abs(circle_heat_spectral(delta, t) - circle_heat_wrapped(delta, t))))
    # sphere mass: Gauss-Legendre in cos(polar); the kernel is zonal about the north pole
    x, wts = np.polynomial.legendre.leggauss(200)
    polar = np.arccos(x)
    mass_gap = 0.0
    for radius, t in [(1.0, 0.05), (1.0, 0.5), (1.5, 1.0)]:
        h = Sphere(radius).heat_kernel(np.zeros((len(x), 2)), np.column_stack([polar, np.zeros_like(x)]), t)
        mass_gap = max(mass_gap, abs(2 * math.pi * radius**2 * np.sum(wts * h) - 1))
    ok = gap <= 1e-10 and mass_gap <= 1e-6
    report(8, ok, f"circle series gap={gap:.1e} (tol 1e-10), sphere mass gap={mass_gap:.1e} (tol 1e-6)")


def test_criterion_09a_varadhan_oracle(report):
    c = Circle(1.0)
    rel = {}
    for arc in (0.1, 0.3, 0.5):
        probe = varadhan_probe(lambda t: float(c.heat_kernel(arc, 0.0, t)[0]), [0.01])
        rel[arc] = abs(probe.estimate - arc**2) / arc**2
    ok = all(r <= 0.05 for r in rel.values())
    report("9a", ok, "relative error at t=0.01 " +
           ", ".join(f"arc {a}: {r:.3f}" for a, r in rel.items()) + " (tol 0.05)")


def test_criterion_09b_varadhan_estimate(report, circle2000):
    p = circle2000
    theta = p.cloud.intrinsic_coords[:, 0]
    arc = np.abs(np.angle(np.exp(1j * (theta - theta[0]))))
    j = int(np.argmin(np.abs(arc - 0.5)))
    d2 = arc[j] ** 2
    probe = {K: varadhan_geodesic(p.nv, p.decomp.mu, K, 0, j, T_LIST) for K in (5, 21)}
    dev = {K: abs(pr.estimate - d2) for K, pr in probe.items()}
    est = probe[21].estimate
    ok = math.isfinite(est) and est > 0 and dev[21] < dev[5]
    report("9b", ok, f"d^2={d2:.4f}, K=21 estimate {est:.4f} (t={probe[21].t_used}), "
                     f"deviation K=5 {dev[5]:.4f} -> K=21 {dev[21]:.4f}")


def test_criterion_10_nystrom(report):
    n = 500
    cloud = sample(Circle(1.0), n, Uniform(), derive_seed(SEED, n))
    ops = build_operators(cloud, KernelConfig(epsilon_schedule(n, 1, "eig", C_MULT), 1))
    dec = eigendecompose(ops, 5)
    gap = max(np.max(np.abs(nystrom_extend(dec, cloud, i, cloud.points) - dec.vtilde[:, i]))
              for i in range(5))
    report(10, gap <= 1e-10, f"max |extension - eigenvector|={gap:.1e} (tol 1e-10)")
