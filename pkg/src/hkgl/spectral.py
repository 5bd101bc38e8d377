"""Eigenpairs of -L through the symmetric conjugate D^{-1/2} W D^{-1/2}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from scipy.spatial.distance import cdist

from .errors import DegenerateError, DomainError, NumericalError

# below this size (or for K close to n) the dense partial solver is used
DENSE_LIMIT = 600
ARPACK_TOL = 1e-13
CLAMP_TOL = 1e-10
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    mu: np.ndarray
    sigma: np.ndarray
    vtilde: np.ndarray
    q: np.ndarray
    epsilon: float
    alpha: int

    @property
    def n(self):
        return self.vtilde.shape[0]

    @property
    def k(self):
        return self.mu.shape[0]


def _top_eigenpairs(a, k):
    n = a.shape[0]
    if n <= DENSE_LIMIT or k >= n // 2:
        w, u = scipy.linalg.eigh(a, subset_by_index=[n - k, n - 1])
    else:
        v0 = np.random.default_rng(0x5EED).standard_normal(n)
        try:
            w, u = eigsh(a, k=k, which="LA", tol=ARPACK_TOL, maxiter=10 * n, v0=v0)
        except ArpackNoConvergence as exc:
            raise NumericalError(f"Lanczos solver did not converge for k={k}, n={n}",
                                 residual=getattr(exc, "eigenvalues", None)) from exc
        order = np.argsort(w)
        w, u = w[order], u[:, order]
    return w[::-1].copy(), u[:, ::-1].copy()


def eigendecompose(ops, k_req: int) -> SpectralDecomposition:
    """Largest ``k_req`` eigenpairs of A, returned as ascending eigenvalues of -L.

    Each eigenvector of A is scaled to unit Euclidean norm and its sign fixed
    so that its largest-magnitude entry is positive.
    """
    n = ops.n
    k_req = int(k_req)
    if not 1 <= k_req <= n:
        raise DomainError(f"K_req must satisfy 1 <= K_req <= n={n}, got {k_req}")
    a = ops.A_sym
    sigma, u = _top_eigenpairs(a, k_req)

    residual = float(np.max(np.linalg.norm(a @ u - u * sigma, axis=0)))
    if residual > RESIDUAL_TOL:
        raise NumericalError(f"eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL}",
                             residual=residual)
    if abs(sigma[0] - 1.0) <= CLAMP_TOL:
        sigma[0] = 1.0
    if sigma[0] > 1.0:
        raise NumericalError(f"top eigenvalue of A is {sigma[0]!r} > 1",
                             residual=sigma[0] - 1.0)

    vt = u / np.sqrt(ops.D_diag)[:, None]
    vt /= np.linalg.norm(vt, axis=0)
    pivot = np.argmax(np.abs(vt), axis=0)
    vt *= np.sign(vt[pivot, np.arange(k_req)])

    mu = (1.0 - sigma) / ops.epsilon**2
    for arr in (mu, sigma, vt):
        arr.setflags(write=False)
    return SpectralDecomposition(mu, sigma, vt, np.asarray(ops.q), ops.epsilon, ops.alpha)


def nystrom_extend(decomp: SpectralDecomposition, cloud, i: int, x_new):
    """Evaluate the i-th eigenvector as a smooth function at new ambient points.

    The density factor at ``x_new`` cancels between numerator and denominator
    and is never formed.
    """
    sigma = float(decomp.sigma[i])
    if abs(sigma) <= 1e-12:
        raise DegenerateError(f"eigenvalue sigma_{i} = {sigma!r} is numerically zero")
    pts = np.asarray(getattr(cloud, "points", cloud), dtype=float)
    x_new = np.asarray(x_new, dtype=float)
    single = x_new.ndim == 1
    x_new = np.atleast_2d(x_new)
    k = np.exp(-cdist(x_new, pts, "sqeuclidean") / (4.0 * decomp.epsilon**2))
    if decomp.alpha == 1:
        k = k / decomp.q[None, :]
    norm = k.sum(axis=1)
    if np.any(norm <= 0):
        raise NumericalError("new point has zero affinity to every sample")
    out = (k @ decomp.vtilde[:, i]) / norm / sigma
    return float(out[0]) if single else out


def align_sign(v, reference):
    """Sign in {+1, -1} minimizing the sup distance to ``reference``; ties give +1."""
    v = np.asarray(v, dtype=float)
    reference = np.asarray(reference, dtype=float)
    plus = float(np.max(np.abs(v - reference)))
    minus = float(np.max(np.abs(-v - reference)))
    return (1, plus) if plus <= minus else (-1, minus)


def orthonormalize(basis, rtol=1e-10):
    """Modified Gram-Schmidt on the columns of ``basis``."""
    basis = np.array(basis, dtype=float, copy=True)
    if basis.ndim == 1:
        basis = basis[:, None]
    q = np.empty_like(basis)
    for j in range(basis.shape[1]):
        w = basis[:, j].copy()
        scale = np.linalg.norm(w)
        for i in range(j):
            w -= (q[:, i] @ w) * q[:, i]
        norm = np.linalg.norm(w)
        if scale == 0 or norm <= rtol * scale:
            raise DegenerateError(f"basis column {j} is linearly dependent on the others")
        q[:, j] = w / norm
    return q


def subspace_residual(v, basis):
    """Sup norm of the part of ``v`` orthogonal to the column span of ``basis``."""
    q = orthonormalize(basis)
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v - q @ (q.T @ v))))
