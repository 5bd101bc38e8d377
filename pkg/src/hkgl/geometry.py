"""Analytic test manifolds, point-cloud sampling and ground-truth oracles.

Three closed manifolds with closed-form Laplace-Beltrami spectra are supported:
the circle and the round sphere of radius r, and the flat torus embedded in
R^4 as a product of two circles (Clifford embedding, exactly isometric).
Intrinsic coordinates are angles: theta for the circle, (polar, azimuth) for
the sphere and (u, v) for the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .errors import ConfigError, DomainError, NumericalError, UnsupportedError

TWO_PI = 2.0 * math.pi
SERIES_TOL = 1e-14
MAX_SERIES_TERMS = 200_000
SMALL_TIME = 0.05
CROSS_CHECK_TOL = 1e-10
ON_MANIFOLD_TOL = 1e-12


def wrap_angle(delta):
    """Map angle differences to [-pi, pi)."""
    return np.mod(np.asarray(delta, dtype=float) + math.pi, TWO_PI) - math.pi


# ---------------------------------------------------------------------------
# circle heat kernel series


def _check_time(t):
    t = float(t)
    if not t > 0 or not math.isfinite(t):
        raise DomainError(f"diffusion time must be positive, got t={t}")
    return t


def circle_spectral_terms(t, radius=1.0):
    """Number of Fourier modes the spectral series needs for tail < 1e-14.

    Returns None when more than ``MAX_SERIES_TERMS`` modes would be needed.
    """
    s = t / radius**2
    for k in range(1, MAX_SERIES_TERMS + 1):
        denom = -math.expm1(-(2 * k + 1) * s)
        if denom > 0 and math.exp(-k * k * s) / denom < SERIES_TOL:
            return k - 1
    return None


def circle_heat_spectral(delta, t, radius=1.0):
    """Heat kernel of the circle from its Fourier series.

    ``delta`` is the angle difference; the value is a density with respect to
    arc length.
    """
    t = _check_time(t)
    kmax = circle_spectral_terms(t, radius)
    if kmax is None:
        raise NumericalError(f"spectral circle series does not converge in "
                             f"{MAX_SERIES_TERMS} terms at t={t}")
    delta = np.asarray(delta, dtype=float)
    s = t / radius**2
    total = np.zeros_like(delta)
    for k in range(kmax, 0, -1):
        total += math.exp(-k * k * s) * np.cos(k * delta)
    return 1.0 / (TWO_PI * radius) + total / (math.pi * radius)


def circle_heat_wrapped(delta, t, radius=1.0):
    """Heat kernel of the circle as a periodised Gaussian (method of images)."""
    t = _check_time(t)
    arc = radius * wrap_angle(delta)
    period = TWO_PI * radius
    # images beyond m keep the exponent below -40
    m_max = int(math.ceil(math.sqrt(160.0 * t) / period)) + 1
    pref = 1.0 / math.sqrt(4.0 * math.pi * t)
    total = np.zeros_like(arc)
    for m in sorted(range(-m_max, m_max + 1), key=abs, reverse=True):
        total += np.exp(-(arc + period * m) ** 2 / (4.0 * t))
    return pref * total


def circle_heat_kernel(delta, t, radius=1.0):
    """Circle heat kernel.

    The image sum is returned because every term is positive, so the value is
    positive even where the kernel underflows the spectral series' absolute
    accuracy. Wherever the spectral series converges the two must agree to
    ``CROSS_CHECK_TOL``.
    """
    t = _check_time(t)
    # even in delta; |delta| keeps H(x, y) == H(y, x) bitwise
    delta = np.abs(np.asarray(delta, dtype=float))
    wrapped = circle_heat_wrapped(delta, t, radius)
    if circle_spectral_terms(t, radius) is not None:
        spectral = circle_heat_spectral(delta, t, radius)
        gap = float(np.max(np.abs(spectral - wrapped), initial=0.0))
        if gap > CROSS_CHECK_TOL:
            raise NumericalError(
                f"circle heat kernel series disagree by {gap:.3e} at t={t}",
                residual=gap)
    elif t >= SMALL_TIME:
        raise NumericalError(f"spectral circle series does not converge at t={t}")
    return wrapped


# ---------------------------------------------------------------------------
# spherical harmonics


def legendre_series(x, coefficients):
    """Evaluate sum_l c_l P_l(x) with the three-term Legendre recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    total = coefficients[0] * p_prev
    if len(coefficients) == 1:
        return total
    p = x.copy()
    total = total + coefficients[1] * p
    for l in range(1, len(coefficients) - 1):
        p_prev, p = p, ((2 * l + 1) * x * p - l * p_prev) / (l + 1)
        total = total + coefficients[l + 1] * p
    return total


def normalized_legendre(l, m, x):
    """Associated Legendre function scaled so that P(cos)*e^{im phi} is unit in L2(S^2).

    No Condon-Shortley phase.
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= m <= l:
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    somx2 = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.full_like(x, math.sqrt(1.0 / (4.0 * math.pi)))
    for k in range(1, m + 1):
        pmm = pmm * math.sqrt((2 * k + 1) / (2.0 * k)) * somx2
    if l == m:
        return pmm
    pm1 = math.sqrt(2 * m + 3) * x * pmm
    if l == m + 1:
        return pm1
    p_prev, p = pmm, pm1
    for ll in range(m + 2, l + 1):
        a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
        b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
        p_prev, p = p, a * (x * p - b * p_prev)
    return p


def real_spherical_harmonic(l, m, polar, azimuth):
    """Real spherical harmonic Y_lm on the unit sphere (m<0 gives the sine part)."""
    x = np.cos(polar)
    plm = normalized_legendre(l, abs(m), x)
    if m == 0:
        return plm
    if m > 0:
        return math.sqrt(2.0) * plm * np.cos(m * azimuth)
    return math.sqrt(2.0) * plm * np.sin(-m * azimuth)


# ---------------------------------------------------------------------------
# manifolds


@dataclass(frozen=True)
class Eigenspace:
    """One eigenvalue of -Laplacian with an L2-orthonormal basis of eigenfunctions."""

    eigenvalue: float
    functions: tuple

    @property
    def multiplicity(self):
        return len(self.functions)

    def basis(self, coords):
        """Discretize the eigenfunctions at intrinsic coordinates, shape (n, m)."""
        return np.column_stack([f(coords) for f in self.functions])


def _as_coords(coords, d):
    coords = np.asarray(coords, dtype=float)
    if d == 1 and coords.ndim == 0:
        return coords.reshape(1, 1)
    if d == 1 and coords.ndim == 1:
        return coords[:, None]
    return coords


class Manifold:
    kind: ClassVar[str]
    intrinsic_dim: ClassVar[int]
    ambient_dim: ClassVar[int]

    def embed(self, coords) -> np.ndarray:
        raise NotImplementedError

    def chart(self, points) -> np.ndarray:
        raise NotImplementedError

    def off_manifold(self, points) -> np.ndarray:
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def _modes_below(self, bound) -> list:
        raise NotImplementedError

    def eigenspaces(self, count):
        """Complete eigenspaces, ascending, covering at least ``count`` eigenvalues."""
        if count < 1:
            raise DomainError(f"count must be >= 1, got {count}")
        bound = 1.0 / self._scale()
        while True:
            spaces = self._modes_below(bound)
            total = sum(s.multiplicity for s in spaces)
            if total >= count:
                out, acc = [], 0
                for s in spaces:
                    out.append(s)
                    acc += s.multiplicity
                    if acc >= count:
                        return out
            bound *= 2.0

    def _scale(self):
        return 1.0

    def heat_kernel(self, x, y, t):
        raise NotImplementedError

    def geodesic(self, x, y):
        raise NotImplementedError

    def density(self, density, coords):
        """Value of the sampling density at intrinsic coordinates (w.r.t. volume)."""
        coords = _as_coords(coords, self.intrinsic_dim)
        base = np.full(coords.shape[0], 1.0 / self.volume)
        if isinstance(density, Uniform):
            return base
        return base * (1.0 + density.amplitude * np.cos(coords[:, 0]))

    def label(self) -> str:
        raise NotImplementedError


def _group_modes(modes):
    """Group (eigenvalue, function) pairs into eigenspaces."""
    modes = sorted(modes, key=lambda m: m[0])
    spaces = []
    for lam, f in modes:
        if spaces and abs(spaces[-1][0] - lam) <= 1e-12 * max(1.0, lam):
            spaces[-1][1].append(f)
        else:
            spaces.append((lam, [f]))
    return [Eigenspace(lam, tuple(fs)) for lam, fs in spaces]


def _circle_mode(k, radius, kind):
    if k == 0:
        c = 1.0 / math.sqrt(TWO_PI * radius)
        return lambda theta: np.full(np.shape(theta), c)
    c = 1.0 / math.sqrt(math.pi * radius)
    if kind == "cos":
        return lambda theta: c * np.cos(k * np.asarray(theta))
    return lambda theta: c * np.sin(k * np.asarray(theta))


def _circle_modes(k, radius):
    if k == 0:
        return [_circle_mode(0, radius, "cos")]
    return [_circle_mode(k, radius, "cos"), _circle_mode(k, radius, "sin")]


@dataclass(frozen=True)
class Circle(Manifold):
    radius: float = 1.0
    kind: ClassVar[str] = "circle"
    intrinsic_dim: ClassVar[int] = 1
    ambient_dim: ClassVar[int] = 2

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"circle radius must be positive, got {self.radius}")

    def embed(self, coords):
        theta = _as_coords(coords, 1)[:, 0]
        return self.radius * np.column_stack([np.cos(theta), np.sin(theta)])

    def chart(self, points):
        points = np.atleast_2d(points)
        return np.mod(np.arctan2(points[:, 1], points[:, 0]), TWO_PI)[:, None]

    def off_manifold(self, points):
        return np.abs(np.linalg.norm(points, axis=1) - self.radius)

    @property
    def volume(self):
        return TWO_PI * self.radius

    def _scale(self):
        return self.radius**2

    def _modes_below(self, bound):
        kmax = int(math.floor(math.sqrt(bound) * self.radius))
        modes = []
        for k in range(kmax + 1):
            lam = (k / self.radius) ** 2
            for f in _circle_modes(k, self.radius):
                modes.append((lam, lambda c, f=f: f(_as_coords(c, 1)[:, 0])))
        return _group_modes(modes)

    def heat_kernel(self, x, y, t):
        x = _as_coords(x, 1)[..., 0]
        y = _as_coords(y, 1)[..., 0]
        return circle_heat_kernel(x - y, t, self.radius)

    def geodesic(self, x, y):
        x = _as_coords(x, 1)[..., 0]
        y = _as_coords(y, 1)[..., 0]
        return self.radius * np.abs(wrap_angle(x - y))

    def label(self):
        return f"circle:{self.radius!r}"


@dataclass(frozen=True)
class Sphere(Manifold):
    radius: float = 1.0
    kind: ClassVar[str] = "sphere"
    intrinsic_dim: ClassVar[int] = 2
    ambient_dim: ClassVar[int] = 3

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError(f"sphere radius must be positive, got {self.radius}")

    def embed(self, coords):
        coords = _as_coords(coords, 2)
        pol, az = coords[:, 0], coords[:, 1]
        return self.radius * np.column_stack(
            [np.sin(pol) * np.cos(az), np.sin(pol) * np.sin(az), np.cos(pol)])

    def chart(self, points):
        points = np.atleast_2d(points)
        r = np.linalg.norm(points, axis=1)
        pol = np.arccos(np.clip(points[:, 2] / r, -1.0, 1.0))
        az = np.mod(np.arctan2(points[:, 1], points[:, 0]), TWO_PI)
        return np.column_stack([pol, az])

    def off_manifold(self, points):
        return np.abs(np.linalg.norm(points, axis=1) - self.radius)

    @property
    def volume(self):
        return 4.0 * math.pi * self.radius**2

    def _scale(self):
        return self.radius**2

    def _modes_below(self, bound):
        modes = []
        l = 0
        while l * (l + 1) / self.radius**2 <= bound:
            lam = l * (l + 1) / self.radius**2
            for m in range(-l, l + 1):
                def f(c, l=l, m=m):
                    c = _as_coords(c, 2)
                    return real_spherical_harmonic(l, m, c[:, 0], c[:, 1]) / self.radius
                modes.append((lam, f))
            l += 1
        return _group_modes(modes)

    def _cos_angle(self, x, y):
        x = _as_coords(x, 2)
        y = _as_coords(y, 2)
        c = (np.sin(x[..., 0]) * np.sin(y[..., 0]) * np.cos(x[..., 1] - y[..., 1])
             + np.cos(x[..., 0]) * np.cos(y[..., 0]))
        return np.clip(c, -1.0, 1.0)

    def heat_kernel(self, x, y, t):
        t = _check_time(t)
        s = t / self.radius**2
        coeffs = []
        l = 0
        while True:
            q = math.exp(-2.0 * (l + 1) * s)
            tail = math.exp(-l * (l + 1) * s) * (2 * l + 1 + 2.0 / (1.0 - q)) / (1.0 - q)
            if tail / (4.0 * math.pi * self.radius**2) < SERIES_TOL:
                break
            coeffs.append((2 * l + 1) * math.exp(-l * (l + 1) * s))
            l += 1
            if l > MAX_SERIES_TERMS:
                raise NumericalError(f"sphere heat series does not converge at t={t}")
        if not coeffs:
            coeffs = [1.0]
        val = legendre_series(self._cos_angle(x, y), coeffs)
        return val / (4.0 * math.pi * self.radius**2)

    def geodesic(self, x, y):
        return self.radius * np.arccos(self._cos_angle(x, y))

    def label(self):
        return f"sphere:{self.radius!r}"


@dataclass(frozen=True)
class FlatTorus(Manifold):
    r1: float = 1.0
    r2: float = 1.0
    kind: ClassVar[str] = "torus"
    intrinsic_dim: ClassVar[int] = 2
    ambient_dim: ClassVar[int] = 4

    def __post_init__(self):
        if not (self.r1 > 0 and self.r2 > 0):
            raise ConfigError(f"torus radii must be positive, got {self.r1}, {self.r2}")

    def embed(self, coords):
        coords = _as_coords(coords, 2)
        u, v = coords[:, 0], coords[:, 1]
        return np.column_stack([self.r1 * np.cos(u), self.r1 * np.sin(u),
                                self.r2 * np.cos(v), self.r2 * np.sin(v)])

    def chart(self, points):
        points = np.atleast_2d(points)
        u = np.mod(np.arctan2(points[:, 1], points[:, 0]), TWO_PI)
        v = np.mod(np.arctan2(points[:, 3], points[:, 2]), TWO_PI)
        return np.column_stack([u, v])

    def off_manifold(self, points):
        a = np.abs(np.linalg.norm(points[:, :2], axis=1) - self.r1)
        b = np.abs(np.linalg.norm(points[:, 2:], axis=1) - self.r2)
        return np.maximum(a, b)

    @property
    def volume(self):
        return TWO_PI * self.r1 * TWO_PI * self.r2

    def _scale(self):
        return max(self.r1, self.r2) ** 2

    def _modes_below(self, bound):
        kmax = int(math.floor(math.sqrt(bound) * self.r1))
        modes = []
        for k in range(kmax + 1):
            rest = bound - (k / self.r1) ** 2
            mmax = int(math.floor(math.sqrt(max(rest, 0.0)) * self.r2))
            for m in range(mmax + 1):
                lam = (k / self.r1) ** 2 + (m / self.r2) ** 2
                for fu in _circle_modes(k, self.r1):
                    for fv in _circle_modes(m, self.r2):
                        def f(c, fu=fu, fv=fv):
                            c = _as_coords(c, 2)
                            return fu(c[:, 0]) * fv(c[:, 1])
                        modes.append((lam, f))
        return _group_modes(modes)

    def heat_kernel(self, x, y, t):
        x = _as_coords(x, 2)
        y = _as_coords(y, 2)
        return (circle_heat_kernel(x[..., 0] - y[..., 0], t, self.r1)
                * circle_heat_kernel(x[..., 1] - y[..., 1], t, self.r2))

    def geodesic(self, x, y):
        x = _as_coords(x, 2)
        y = _as_coords(y, 2)
        du = self.r1 * wrap_angle(x[..., 0] - y[..., 0])
        dv = self.r2 * wrap_angle(x[..., 1] - y[..., 1])
        return np.sqrt(du * du + dv * dv)

    def label(self):
        return f"torus:{self.r1!r},{self.r2!r}"


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class Uniform:
    def label(self):
        return "uniform"


@dataclass(frozen=True)
class CosinePerturbed:
    """Density proportional to 1 + a*cos of the first intrinsic angle."""

    amplitude: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.amplitude < 1.0:
            raise ConfigError(f"cosine amplitude must lie in [0, 1), got {self.amplitude}")

    def label(self):
        return f"cosine:{self.amplitude!r}"


def parse_manifold(text: str) -> Manifold:
    """Parse ``circle:1.0``, ``sphere:2`` or ``torus:1.0,0.5``."""
    kind, _, params = text.strip().partition(":")
    kind = kind.lower()
    try:
        values = [float(p) for p in params.split(",")] if params else []
    except ValueError as exc:
        raise ConfigError(f"bad manifold parameters in {text!r}") from exc
    if kind == "circle" and len(values) <= 1:
        return Circle(*values)
    if kind == "sphere" and len(values) <= 1:
        return Sphere(*values)
    if kind in ("torus", "flattorus") and len(values) in (0, 2):
        return FlatTorus(*values)
    raise ConfigError(f"unknown manifold {text!r}; expected circle:<r>, "
                      f"sphere:<r> or torus:<r1>,<r2>")


def parse_density(text: str):
    kind, _, params = text.strip().partition(":")
    kind = kind.lower()
    if kind == "uniform" and not params:
        return Uniform()
    if kind in ("cosine", "cos"):
        try:
            return CosinePerturbed(float(params) if params else 0.5)
        except ValueError as exc:
            raise ConfigError(f"bad density amplitude in {text!r}") from exc
    raise ConfigError(f"unknown density {text!r}; expected uniform or cosine:<a>")


# ---------------------------------------------------------------------------
# point clouds


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    intrinsic_coords: np.ndarray
    manifold: Manifold
    density: object = field(default_factory=Uniform)
    seed: int = 0

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        coords = _as_coords(self.intrinsic_coords, self.manifold.intrinsic_dim)
        n = points.shape[0]
        if n < 2:
            raise DomainError(f"a point cloud needs n >= 2 points, got {n}")
        if points.shape != (n, self.manifold.ambient_dim):
            raise ConfigError(f"points must have shape (n, {self.manifold.ambient_dim}), "
                              f"got {points.shape}")
        if coords.shape != (n, self.manifold.intrinsic_dim):
            raise ConfigError(f"intrinsic coords must have shape "
                              f"(n, {self.manifold.intrinsic_dim}), got {coords.shape}")
        off = float(np.max(self.manifold.off_manifold(points)))
        if off > ON_MANIFOLD_TOL * max(1.0, self._scale()):
            raise ConfigError(f"points lie off the {self.manifold.kind} by {off:.3e}")
        if np.unique(points, axis=0).shape[0] != n:
            raise ConfigError("point cloud contains duplicate rows")
        points.setflags(write=False)
        coords.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "intrinsic_coords", coords)

    def _scale(self):
        return float(np.max(np.abs(self.points)))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def intrinsic_dim(self):
        return self.manifold.intrinsic_dim

    @property
    def ambient_dim(self):
        return self.manifold.ambient_dim


def _draw_coords(manifold, density, size, rng):
    d = manifold.intrinsic_dim
    if isinstance(manifold, Circle):
        u = rng.random(size)
        if isinstance(density, Uniform):
            return (TWO_PI * u)[:, None]
        return _circle_inverse_cdf(u, density.amplitude)[:, None]
    if isinstance(manifold, Sphere):
        sampler = lambda k: _sphere_uniform(k, rng)
    elif isinstance(manifold, FlatTorus):
        sampler = lambda k: rng.random((k, 2)) * TWO_PI
    else:
        raise UnsupportedError(f"sampling not supported for ({manifold.label()}, "
                               f"{density.label()})")
    if isinstance(density, Uniform):
        return sampler(size)
    # rejection sampling against the uniform proposal
    a = density.amplitude
    out = np.empty((0, d))
    while out.shape[0] < size:
        k = 2 * (size - out.shape[0]) + 16
        prop = sampler(k)
        accept = rng.random(k) * (1.0 + a) < 1.0 + a * np.cos(prop[:, 0])
        out = np.vstack([out, prop[accept]])
    return out[:size]


def _sphere_uniform(size, rng):
    u, v = rng.random(size), rng.random(size)
    pol = np.arccos(np.clip(1.0 - 2.0 * u, -1.0, 1.0))
    return np.column_stack([pol, TWO_PI * v])


def _circle_inverse_cdf(u, a, tol=1e-12):
    """Solve theta + a*sin(theta) = 2*pi*u by bisection."""
    target = TWO_PI * np.asarray(u, dtype=float)
    lo = np.zeros_like(target)
    hi = np.full_like(target, TWO_PI)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = mid + a * np.sin(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sample(manifold: Manifold, n: int, density=None, seed: int = 0) -> PointCloud:
    """Draw ``n`` i.i.d. points; duplicate rows are redrawn."""
    density = Uniform() if density is None else density
    if int(n) < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not isinstance(density, (Uniform, CosinePerturbed)):
        raise UnsupportedError(f"unsupported density {density!r}")
    n = int(n)
    rng = np.random.default_rng(seed)
    coords = _draw_coords(manifold, density, n, rng)
    points = manifold.embed(coords)
    while True:
        _, first = np.unique(points, axis=0, return_index=True)
        if first.size == n:
            break
        dup = np.setdiff1d(np.arange(n), first)
        coords[dup] = _draw_coords(manifold, density, dup.size, rng)
        points = manifold.embed(coords)
    return PointCloud(points, coords, manifold, density, seed)


# ---------------------------------------------------------------------------
# functional interface


def analytic_spectrum(manifold: Manifold, count: int) -> list:
    """Leading eigenspaces of -Laplacian, enough to hold ``count`` eigenvalues."""
    return manifold.eigenspaces(int(count))


def analytic_eigenvalues(manifold: Manifold, count: int) -> np.ndarray:
    """The first ``count`` eigenvalues counted with multiplicity, ascending."""
    vals = [s.eigenvalue for s in manifold.eigenspaces(count) for _ in s.functions]
    return np.array(vals[:count])


def eigenspace_partition(manifold: Manifold, count: int) -> list:
    """Index ranges of the eigenspaces that fit completely inside the first ``count``."""
    out, start = [], 0
    for space in manifold.eigenspaces(count):
        stop = start + space.multiplicity
        if stop > count:
            break
        out.append((space, range(start, stop)))
        start = stop
    return out


def analytic_heat_kernel(manifold: Manifold, x, y, t):
    return manifold.heat_kernel(x, y, t)


def geodesic_distance(manifold: Manifold, x, y):
    return manifold.geodesic(x, y)


def eigenfunction(manifold: Manifold, index: int):
    """(lambda_index, phi_index) in the ascending, multiplicity-counted order."""
    index = int(index)
    if index < 0:
        raise DomainError(f"eigenfunction index must be >= 0, got {index}")
    pairs = [(s.eigenvalue, f) for s in manifold.eigenspaces(index + 1) for f in s.functions]
    return pairs[index]
