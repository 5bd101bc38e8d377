#!/usr/bin/env python3
"""Sweep the bandwidth multiplier c and report every circle acceptance quantity.

Usage: python3 scripts/calibrate.py 0.07 0.1 [--seed 0] [--repeats 4]
"""

import argparse

import numpy as np

from hkgl.experiments import convergence_run, derive_seed, pointwise_check, run_pipeline
from hkgl.geometry import Circle, CosinePerturbed, Uniform, sample
from hkgl.graph import ScheduleMode, epsilon_schedule
from hkgl.heat import heat_kernel_matrix, oracle_heat_matrix, sup_error_vs_oracle, varadhan_geodesic

NS = [500, 1000, 2000, 4000]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("c", type=float, nargs="+")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=4, help="clouds averaged per n in the sweeps")
    args = ap.parse_args()
    circle = Circle(1.0)
    for c in args.c:
        print(f"=== c = {c}")
        res1 = convergence_run(circle, Uniform(), NS, alpha=1, c=c, K=5, seed=args.seed,
                               repeats=args.repeats)
        errs = np.array([r.eigenvalue_errors[1:] for r in res1.records])
        mono = bool(np.all(np.diff(errs, axis=0) < 0))
        print("  alpha=1 eig errors (idx 1..4):", errs.round(4).tolist())
        print(f"  strictly decreasing: {mono}  |mu1-1|@4000={errs[-1, 0]:.4f}"
              f"  slope={res1.fits['eigenvalue_error'].slope:.2f}")
        vec = res1.series("eigenvector_residual")
        print("  eigvec residual:", np.round(vec, 4).tolist())
        res0 = convergence_run(circle, Uniform(), NS, alpha=0, c=c, K=5, seed=args.seed,
                               repeats=args.repeats,
                               schedule_mode=ScheduleMode.UNNORMALIZED_EIG)
        print(f"  alpha=0 slope={res0.fits['eigenvalue_error'].slope:.2f}",
              np.array([r.eigenvalue_errors[1:] for r in res0.records]).round(4).tolist())

        eps = epsilon_schedule(2000, 1, "eig", c)
        cloud = sample(circle, 2000, Uniform(), derive_seed(args.seed, 2000))
        p = run_pipeline(cloud, eps, 1, 21)
        out = {}
        for K, t in [(5, 0.5), (21, 0.5), (21, 2.0)]:
            est = heat_kernel_matrix(p.nv, p.decomp.mu, K, t)
            out[K, t] = sup_error_vs_oracle(est, cloud, t, oracle_heat_matrix(cloud, t))
        print(f"  heat eps={eps:.4f}", {k: tuple(round(x, 5) for x in v) for k, v in out.items()})

        theta = cloud.intrinsic_coords[:, 0]
        arc = np.abs(np.angle(np.exp(1j * (theta - theta[0]))))
        j = int(np.argmin(np.abs(arc - 0.5)))
        tl = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
        for K in (5, 21):
            pr = varadhan_geodesic(p.nv, p.decomp.mu, K, 0, j, tl)
            print(f"  varadhan K={K}: d2={arc[j]**2:.4f} est={pr.estimate:.4f} t={pr.t_used}")

        eps4 = epsilon_schedule(4000, 1, "eig", c)
        cl = sample(circle, 4000, CosinePerturbed(0.5), derive_seed(args.seed, 4000))
        mu1 = {a: run_pipeline(cl, eps4, a, 3).decomp.mu[1] for a in (0, 1)}
        print(f"  density: |mu1-1| alpha1={abs(mu1[1]-1):.4f} alpha0={abs(mu1[0]-1):.4f}")

        pw = {}
        for n in (500, 4000):
            cl = sample(circle, n, Uniform(), derive_seed(args.seed, n))
            pl = run_pipeline(cl, epsilon_schedule(n, 1, "eig", c), 1, 2)
            pw[n] = pointwise_check(cl, pl.ops, lambda x: np.cos(x[:, 0]),
                                    lambda x: -np.cos(x[:, 0]))
        print(f"  pointwise: {pw}")


if __name__ == "__main__":
    main()
