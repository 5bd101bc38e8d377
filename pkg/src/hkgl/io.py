"""CSV and binary persistence for clouds, operators, spectra and heat kernels.

Binary containers are little-endian: a 4-byte magic, a u16 format version, a
fixed header and then row-major float64 payloads.
"""

from __future__ import annotations

import contextlib
import csv
import struct
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import PointCloud, parse_density, parse_manifold
from .graph import KernelConfig, operators_from_kernel
from .spectral import SpectralDecomposition

VERSION = 1
FLOAT_FMT = "%.17g"

_GRAPH_HEADER = struct.Struct("<4sHQdd")      # magic, version, n, eps, alpha
_SPECTRUM_HEADER = struct.Struct("<4sHQQdd")  # magic, version, n, K, eps, alpha
_HEAT_HEADER = struct.Struct("<4sHQQddd")     # magic, version, n, K, t, eps, alpha


@contextlib.contextmanager
def _text_out(path):
    """Open ``path`` for writing; ``None`` or ``"-"`` means stdout."""
    if path is None or str(path) == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(x):
    return FLOAT_FMT % x


def _meta_line(**kw):
    return "# " + " ".join(f"{k}={v}" for k, v in kw.items())


def _parse_meta(line):
    if not line.startswith("#"):
        raise ConfigError(f"missing metadata header line, got {line[:40]!r}")
    out = {}
    for tok in line[1:].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise ConfigError(f"malformed header token {tok!r}")
        out[key] = val
    return out


def _read_payload(buf, offset, count):
    arr = np.frombuffer(buf, dtype="<f8", count=count, offset=offset)
    return arr.astype(float), offset + 8 * count


def _check_magic(found, expected, path):
    if found != expected:
        raise ConfigError(f"{path}: bad magic {found!r}, expected {expected!r}")


# ---------------------------------------------------------------------------
# point clouds


def write_point_cloud(path, cloud: PointCloud):
    m = cloud.manifold
    with _text_out(path) as fh:
        fh.write(_meta_line(manifold=m.label(), d=m.intrinsic_dim, D=m.ambient_dim,
                            density=cloud.density.label(), seed=int(cloud.seed), n=cloud.n))
        fh.write("\n")
        rows = np.hstack([cloud.points, cloud.intrinsic_coords])
        np.savetxt(fh, rows, delimiter=",", fmt=FLOAT_FMT)


def read_point_cloud(path) -> PointCloud:
    with open(path) as fh:
        meta = _parse_meta(fh.readline())
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    try:
        manifold = parse_manifold(meta["manifold"])
        density = parse_density(meta["density"])
        d, D, n = int(meta["d"]), int(meta["D"]), int(meta["n"])
        seed = int(meta["seed"])
    except KeyError as exc:
        raise ConfigError(f"{path}: header lacks {exc}") from exc
    if (d, D) != (manifold.intrinsic_dim, manifold.ambient_dim):
        raise ConfigError(f"{path}: header dimensions do not match {meta['manifold']}")
    if data.shape != (n, D + d):
        raise ConfigError(f"{path}: expected {n} rows of {D + d} values, got {data.shape}")
    return PointCloud(data[:, :D], data[:, D:], manifold, density, seed)


# ---------------------------------------------------------------------------
# graph operators ("HKGL")


def write_graph_operators(path, ops):
    with open(path, "wb") as fh:
        fh.write(_GRAPH_HEADER.pack(b"HKGL", VERSION, ops.n, ops.epsilon, float(ops.alpha)))
        fh.write(np.ascontiguousarray(ops.kernel_matrix, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ops.q, dtype="<f8").tobytes())


def read_graph_operators(path):
    buf = Path(path).read_bytes()
    magic, _, n, eps, alpha = _GRAPH_HEADER.unpack_from(buf)
    _check_magic(magic, b"HKGL", path)
    k, off = _read_payload(buf, _GRAPH_HEADER.size, n * n)
    q, _ = _read_payload(buf, off, n)
    return operators_from_kernel(k.reshape(n, n), q, KernelConfig(eps, int(alpha)))


# ---------------------------------------------------------------------------
# spectra ("HKSD" + CSV)


def write_eigenvectors(path, decomp: SpectralDecomposition, norms=None):
    """Store mu, sigma, vtilde, the raw degrees and (optionally) the weighted norms."""
    n, k = decomp.n, decomp.k
    norms = np.full(k, np.nan) if norms is None else np.asarray(norms, dtype=float)
    with open(path, "wb") as fh:
        fh.write(_SPECTRUM_HEADER.pack(b"HKSD", VERSION, n, k, decomp.epsilon,
                                       float(decomp.alpha)))
        for arr in (decomp.mu, decomp.sigma, decomp.vtilde, decomp.q, norms):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_eigenvectors(path):
    """Returns (SpectralDecomposition, norms); norms are NaN when not stored."""
    buf = Path(path).read_bytes()
    magic, _, n, k, eps, alpha = _SPECTRUM_HEADER.unpack_from(buf)
    _check_magic(magic, b"HKSD", path)
    off = _SPECTRUM_HEADER.size
    mu, off = _read_payload(buf, off, k)
    sigma, off = _read_payload(buf, off, k)
    vt, off = _read_payload(buf, off, n * k)
    q, off = _read_payload(buf, off, n)
    norms, _ = _read_payload(buf, off, k)
    decomp = SpectralDecomposition(mu, sigma, vt.reshape(n, k), q, eps, int(alpha))
    return decomp, norms


def write_spectrum_csv(path, decomp: SpectralDecomposition, lambda_true=None, **meta):
    with _text_out(path) as fh:
        fh.write(_meta_line(epsilon=_fmt(decomp.epsilon), alpha=decomp.alpha, n=decomp.n,
                            k=decomp.k, **meta) + "\n")
        w = csv.writer(fh)
        cols = ["index", "mu", "sigma"]
        if lambda_true is not None:
            cols += ["lambda_true", "abs_err"]
        w.writerow(cols)
        for i in range(decomp.k):
            row = [i, _fmt(decomp.mu[i]), _fmt(decomp.sigma[i])]
            if lambda_true is not None:
                row += [_fmt(lambda_true[i]), _fmt(abs(decomp.mu[i] - lambda_true[i]))]
            w.writerow(row)


def read_table(path):
    """Read a CSV with optional leading/trailing '#' lines.

    Returns (metadata dict from the first comment line, list of row dicts,
    list of trailing comment dicts).
    """
    meta, comments, lines = {}, [], []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                if not lines and not meta:
                    meta = _parse_meta(line)
                else:
                    comments.append(_parse_meta(line))
            elif line:
                lines.append(line)
    rows = list(csv.DictReader(lines))
    return meta, rows, comments


# ---------------------------------------------------------------------------
# density and heat outputs


def write_kde_csv(path, counts, p_hat, p_true=None):
    with _text_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(["index", "N", "p_hat"] + (["p_true"] if p_true is not None else []))
        for i, (nn, p) in enumerate(zip(counts.N, p_hat)):
            row = [i, int(nn), _fmt(p)]
            if p_true is not None:
                row.append(_fmt(p_true[i]))
            w.writerow(row)


def parse_pairs(text, n):
    """``all`` (upper triangle incl. diagonal) or ``i:j,i:j,...``."""
    text = text.strip()
    if text == "all":
        iu, ju = np.triu_indices(n)
        return list(zip(iu.tolist(), ju.tolist()))
    pairs = []
    for tok in text.split(","):
        a, sep, b = tok.partition(":")
        try:
            i, j = int(a), int(b)
        except ValueError as exc:
            raise ConfigError(f"bad pair {tok!r}; expected i:j") from exc
        if not sep or not (0 <= i < n and 0 <= j < n):
            raise ConfigError(f"pair {tok!r} out of range for n={n}")
        pairs.append((i, j))
    return pairs


def write_heat_csv(path, values, pairs, oracle=None, **meta):
    """``values`` is an (n, n) matrix or a callable (i, j) -> value."""
    get = values if callable(values) else (lambda i, j: values[i, j])
    with _text_out(path) as fh:
        if meta:
            fh.write(_meta_line(**meta) + "\n")
        w = csv.writer(fh)
        w.writerow(["i", "j", "H_est"] + (["H_true", "abs_err"] if oracle is not None else []))
        for i, j in pairs:
            h = get(i, j)
            row = [i, j, _fmt(h)]
            if oracle is not None:
                ht = oracle(i, j)
                row += [_fmt(ht), _fmt(abs(h - ht))]
            w.writerow(row)


def write_heat_matrix(path, est):
    eps = np.nan if est.epsilon is None else est.epsilon
    alpha = np.nan if est.alpha is None else float(est.alpha)
    with open(path, "wb") as fh:
        fh.write(_HEAT_HEADER.pack(b"HKHT", VERSION, est.n, est.K, est.t, eps, alpha))
        fh.write(np.ascontiguousarray(est.H, dtype="<f8").tobytes())


def read_heat_matrix(path):
    from .heat import HeatKernelEstimate

    buf = Path(path).read_bytes()
    magic, _, n, k, t, eps, alpha = _HEAT_HEADER.unpack_from(buf)
    _check_magic(magic, b"HKHT", path)
    h, _ = _read_payload(buf, _HEAT_HEADER.size, n * n)
    return HeatKernelEstimate(h.reshape(n, n), int(k), t,
                              None if np.isnan(eps) else eps,
                              None if np.isnan(alpha) else int(alpha))


# ---------------------------------------------------------------------------
# convergence runs


def write_convergence_csv(path, result):
    with _text_out(path) as fh:
        w = csv.writer(fh)
        w.writerow(["n", "epsilon", "alpha", "metric", "index", "value"])
        for rec in result.records:
            for metric, idx, val in rec.metrics():
                w.writerow([rec.n, _fmt(rec.epsilon), rec.alpha, metric, idx, _fmt(val)])
        for metric, fit in result.fits.items():
            if fit is None:
                fh.write(f"# metric={metric} slope=nan intercept=nan r2=nan\n")
            else:
                fh.write(f"# metric={metric} slope={_fmt(fit.slope)} "
                         f"intercept={_fmt(fit.intercept)} r2={_fmt(fit.r_squared)}\n")


def write_rows(path, header, rows, **meta):
    """Generic CSV with an optional ``# key=value`` metadata line."""
    with _text_out(path) as fh:
        if meta:
            fh.write(_meta_line(**meta) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) if isinstance(x, float) else x for x in row])
