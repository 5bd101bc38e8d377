"""``hkgl`` command line: sample, spectrum, heat, converge, pointwise, varadhan.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

import numpy as np

from . import io
from .config import RunConfig, parse_epsilon
from .density import kde
from .errors import ConfigError, HKGLError
from .experiments import convergence_run, pointwise_check, run_pipeline
from .geometry import (Uniform, analytic_eigenvalues, eigenfunction, parse_density,
                       parse_manifold, sample)
from .graph import KernelConfig, build_operators, epsilon_schedule
from .heat import heat_kernel_matrix, suggest_truncation, varadhan_geodesic, varadhan_probe

log = logging.getLogger("hkgl")

DEFAULT_K = {"spectrum": 10, "converge": 5, "varadhan": 21}


# ---------------------------------------------------------------------------
# argument parsing


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON run configuration; flags override its keys")
    common.add_argument("--threads", type=int, help="BLAS threads (0 = library default)")
    common.add_argument("--out", help="output path (stdout when omitted)")
    common.add_argument("--seed", type=int, help="u64 seed; HK_SEED overrides it")
    common.add_argument("-v", "--verbose", action="store_true", default=False)

    cloud = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    cloud.add_argument("--manifold", help="circle:<r> | sphere:<r> | torus:<r1>,<r2>")
    cloud.add_argument("--density", help="uniform | cosine:<a>")
    cloud.add_argument("--n", type=int, help="number of samples")
    cloud.add_argument("--cloud", help="read the point cloud CSV instead of sampling")

    graph = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    graph.add_argument("--alpha", type=int, choices=(0, 1))
    graph.add_argument("--epsilon", help="auto:<eig|vec|un-eig|un-vec> or a positive number")
    graph.add_argument("--epsilon-mult", type=float, help="schedule constant c")

    ap = argparse.ArgumentParser(prog="hkgl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common, cloud], argument_default=argparse.SUPPRESS,
                       help="draw a point cloud and write it as CSV")

    p = sub.add_parser("spectrum", parents=[common, cloud, graph],
                       argument_default=argparse.SUPPRESS, help="eigenvalues of -L")
    p.add_argument("--k", type=int, help="number of eigenpairs")
    p.add_argument("--oracle", action="store_true", help="add lambda_true and abs_err")
    p.add_argument("--vectors", help="write eigenvectors to an HKSD container")
    p.add_argument("--kde-out", help="write the KDE CSV")

    p = sub.add_parser("heat", parents=[common, cloud, graph],
                       argument_default=argparse.SUPPRESS, help="heat kernel estimate")
    p.add_argument("--t", type=float, help="diffusion time")
    p.add_argument("--k", type=int, help="truncation")
    p.add_argument("--suggest-k", action="store_true", help="choose K from t")
    p.add_argument("--C", type=float, help="constant for --suggest-k")
    p.add_argument("--pairs", help="all | i:j,i:j,...")
    p.add_argument("--oracle", action="store_true", help="add H_true and abs_err")
    p.add_argument("--matrix", help="write the full matrix to an HKHT container")

    p = sub.add_parser("converge", parents=[common, cloud, graph],
                       argument_default=argparse.SUPPRESS, help="convergence sweep over n")
    p.add_argument("--ns", type=_int_list, help="ascending sample sizes, e.g. 500,1000,2000")
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--repeats", type=int, help="independent clouds averaged per n")

    p = sub.add_parser("pointwise", parents=[common, cloud, graph],
                       argument_default=argparse.SUPPRESS,
                       help="max |L f - Laplacian f| for an oracle eigenfunction f")
    p.add_argument("--index", type=int, help="eigenfunction index (default 1)")
    p.add_argument("--ns", type=_int_list, help="sample sizes (default: --n)")

    p = sub.add_parser("varadhan", parents=[common, cloud, graph],
                       argument_default=argparse.SUPPRESS, help="-4 t log H geodesic probe")
    p.add_argument("--pairs", help="i:j,i:j,...")
    p.add_argument("--k", type=int)
    p.add_argument("--t-list", type=_float_list, help="strictly descending times")
    p.add_argument("--source", choices=("estimate", "oracle"))
    p.add_argument("--oracle", action="store_true", help="add the true squared distance")
    return ap


def resolve_config(argv=None, environ=None) -> RunConfig:
    """Merge --config JSON, explicit flags and HK_SEED into a validated RunConfig."""
    environ = os.environ if environ is None else environ
    ns = vars(build_parser().parse_args(argv))
    ns.pop("verbose", None)
    data = {}
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"--config: cannot read {path} ({exc})") from exc
        data = RunConfig.from_json(text).__dict__.copy()
        if data["command"] != ns["command"]:
            raise ConfigError(f"--config: file is for {data['command']!r}, "
                              f"command line says {ns['command']!r}")
    data.update(ns)
    if environ.get("HK_SEED"):
        try:
            data["seed"] = int(environ["HK_SEED"])
        except ValueError as exc:
            raise ConfigError(f"HK_SEED: not an integer: {environ['HK_SEED']!r}") from exc
    return RunConfig.from_dict(data).validate()


# ---------------------------------------------------------------------------
# shared steps


def _cloud(cfg):
    if cfg.cloud is not None:
        return io.read_point_cloud(cfg.cloud)
    return sample(parse_manifold(cfg.manifold), cfg.n, parse_density(cfg.density), cfg.seed)


def _epsilon(cfg, n, d):
    mode, value = parse_epsilon(cfg.epsilon)
    return epsilon_schedule(n, d, mode, cfg.epsilon_mult, value)


def _pipeline(cfg, cloud, K):
    eps = _epsilon(cfg, cloud.n, cloud.intrinsic_dim)
    log.info("n=%d eps=%.6g alpha=%d K=%d", cloud.n, eps, cfg.alpha, K)
    return run_pipeline(cloud, eps, cfg.alpha, K)


def _meta(cloud):
    return dict(manifold=cloud.manifold.label(), density=cloud.density.label(),
                seed=int(cloud.seed))


# ---------------------------------------------------------------------------
# commands


def cmd_sample(cfg):
    cloud = _cloud(cfg)
    io.write_point_cloud(cfg.out, cloud)


def cmd_spectrum(cfg):
    cloud = _cloud(cfg)
    p = _pipeline(cfg, cloud, cfg.k or DEFAULT_K["spectrum"])
    truth = analytic_eigenvalues(cloud.manifold, p.decomp.k) if cfg.oracle else None
    io.write_spectrum_csv(cfg.out, p.decomp, truth, **_meta(cloud))
    if cfg.vectors:
        io.write_eigenvectors(cfg.vectors, p.decomp, p.nv.norms)
    if cfg.kde_out:
        d = cloud.intrinsic_dim
        p_true = cloud.manifold.density(cloud.density, cloud.intrinsic_coords) if cfg.oracle else None
        io.write_kde_csv(cfg.kde_out, p.counts, kde(p.counts, cloud.n, d), p_true)


def cmd_heat(cfg):
    cloud = _cloud(cfg)
    K = cfg.k
    if cfg.suggest_k:
        K = suggest_truncation(cfg.t, cloud.intrinsic_dim, cfg.C)
        log.info("suggested K=%d for t=%g", K, cfg.t)
    if K > cloud.n:
        raise ConfigError(f"--k: truncation {K} exceeds n={cloud.n}")
    p = _pipeline(cfg, cloud, K)
    est = heat_kernel_matrix(p.nv, p.decomp.mu, K, cfg.t, p.epsilon, cfg.alpha)
    pairs = io.parse_pairs(cfg.pairs or "all", cloud.n)
    oracle = None
    if cfg.oracle:
        c = cloud.intrinsic_coords
        oracle = lambda i, j: np.asarray(cloud.manifold.heat_kernel(c[i], c[j], cfg.t)).item()
    io.write_heat_csv(cfg.out, est.H, pairs, oracle, t=cfg.t, K=K, epsilon=p.epsilon,
                      alpha=cfg.alpha, **_meta(cloud))
    if cfg.matrix:
        io.write_heat_matrix(cfg.matrix, est)


def cmd_converge(cfg):
    manifold, density = parse_manifold(cfg.manifold), parse_density(cfg.density)
    if cfg.alpha == 0 and not isinstance(density, Uniform):
        log.warning("alpha=0 rates assume uniform sampling; %s will bias the spectrum",
                    density.label())
    mode, value = parse_epsilon(cfg.epsilon)
    result = convergence_run(manifold, density, cfg.ns, alpha=cfg.alpha, schedule_mode=mode,
                             c=cfg.epsilon_mult, K=cfg.k or DEFAULT_K["converge"],
                             t=cfg.t or 0.5, seed=cfg.seed, repeats=cfg.repeats, epsilon=value)
    io.write_convergence_csv(cfg.out, result)


def cmd_pointwise(cfg):
    rows = []
    for n in cfg.ns or [cfg.n]:
        cloud = _cloud(cfg if cfg.ns is None else RunConfig(**{**cfg.__dict__, "n": n}))
        lam, phi = eigenfunction(cloud.manifold, cfg.index)
        eps = _epsilon(cfg, cloud.n, cloud.intrinsic_dim)
        ops = build_operators(cloud, KernelConfig(eps, cfg.alpha))
        err = pointwise_check(cloud, ops, phi, lambda x: -lam * phi(x))
        rows.append([cloud.n, eps, cfg.alpha, cfg.index, float(lam), err])
    io.write_rows(cfg.out, ["n", "epsilon", "alpha", "index", "lambda", "max_abs_err"], rows)


def cmd_varadhan(cfg):
    cloud = _cloud(cfg)
    pairs = io.parse_pairs(cfg.pairs, cloud.n)
    t_list = cfg.t_list
    c = cloud.intrinsic_coords
    K = cfg.k or DEFAULT_K["varadhan"]
    if cfg.source == "estimate":
        p = _pipeline(cfg, cloud, K)
    rows = []
    for i, j in pairs:
        if cfg.source == "oracle":
            probe = varadhan_probe(
                lambda t: np.asarray(cloud.manifold.heat_kernel(c[i], c[j], t)).item(), t_list)
        else:
            probe = varadhan_geodesic(p.nv, p.decomp.mu, K, i, j, t_list)
        row = [i, j, probe.t_used, probe.estimate]
        if cfg.oracle:
            d2 = np.asarray(cloud.manifold.geodesic(c[i], c[j])).item() ** 2
            row += [d2, abs(probe.estimate - d2)]
        rows.append(row)
    header = ["i", "j", "t_used", "d2_est"] + (["d2_true", "abs_err"] if cfg.oracle else [])
    io.write_rows(cfg.out, header, rows, source=cfg.source, K=K, **_meta(cloud))


COMMANDS = {
    "sample": cmd_sample,
    "spectrum": cmd_spectrum,
    "heat": cmd_heat,
    "converge": cmd_converge,
    "pointwise": cmd_pointwise,
    "varadhan": cmd_varadhan,
}


def _thread_limit(threads):
    if not threads:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=threads)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    verbose = "-v" in argv or "--verbose" in argv
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="hkgl: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(argv)
        with _thread_limit(cfg.threads):
            COMMANDS[cfg.command](cfg)
    except HKGLError as exc:
        print(f"hkgl: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:  # argparse usage errors already exit with 2
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
