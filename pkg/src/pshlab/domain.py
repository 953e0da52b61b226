"""Planar domains (unit disc, annulus) with their Green functions.

The Green function G(z, z0) is negative inside, vanishes on the boundary and
behaves like log|z - z0| at the pole. Sublevel sets {m G < -t} are the
regions on which every minimal integral in this package lives.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar

from . import _backend
from .errors import DomainError

SHAPES = ("unit-disc", "annulus")
SERIES_TOL = 1e-12
SERIES_CAP = 512


def _image_terms(rho: float, s: float, tol: float = SERIES_TOL) -> int:
    """Number of image-pair factors so the next factor is below ``tol``.

    Factor m of the product is bounded in sup norm by
    sum_i -log(1 - rho^(2m) x_i) with x_i the largest moduli of the four
    image ratios over the closed annulus.
    """
    xs = (rho * rho / s, s, rho * s, rho / s)
    q = 1.0
    for m in range(SERIES_CAP):
        bound = sum(-math.log1p(-q * x) for x in xs)
        if bound < tol * (1.0 - rho * rho):
            return max(m, 1)
        q *= rho * rho
    return SERIES_CAP


@dataclass(frozen=True)
class DomainModel:
    shape: str = "unit-disc"
    base_point: complex = 0j
    inner_radius: float = 0.0
    green_series_terms: int | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown domain shape {self.shape!r}")
        object.__setattr__(self, "base_point", complex(self.base_point))
        a = abs(self.base_point)
        if self.shape == "unit-disc":
            if self.inner_radius != 0.0:
                raise DomainError("unit disc takes no inner radius")
            if not a < 1:
                raise DomainError(f"base point {self.base_point} not inside the unit disc")
        else:
            rho = float(self.inner_radius)
            if not 0 < rho < 1:
                raise DomainError(f"annulus inner radius {rho} not in (0, 1)")
            if not rho < a < 1:
                raise DomainError(
                    f"base point {self.base_point} not inside the annulus {rho} < |z| < 1")
            if self.green_series_terms is None:
                object.__setattr__(self, "green_series_terms", _image_terms(rho, a))
            elif not 1 <= self.green_series_terms <= SERIES_CAP:
                raise DomainError("green_series_terms must lie in [1, 512]")

    @classmethod
    def disc(cls, z0: complex = 0j) -> "DomainModel":
        return cls("unit-disc", z0)

    @classmethod
    def annulus(cls, rho: float, z0: complex | None = None,
                terms: int | None = None) -> "DomainModel":
        if z0 is None:
            z0 = math.sqrt(rho)
        return cls("annulus", z0, rho, terms)

    @property
    def is_annulus(self) -> bool:
        return self.shape == "annulus"

    @property
    def r_min(self) -> float:
        """Inner radius of the bounding annulus (0 for the disc)."""
        return self.inner_radius if self.is_annulus else 0.0

    @property
    def is_centered_disc(self) -> bool:
        return self.shape == "unit-disc" and self.base_point == 0

    def contains(self, z) -> np.ndarray:
        r = np.abs(np.asarray(z, dtype=np.complex128))
        if self.is_annulus:
            return (r < 1.0) & (r > self.inner_radius)
        return r < 1.0

    def green(self, z) -> np.ndarray:
        """Vectorized Green function; no interior check, -inf at the pole."""
        z = np.asarray(z, dtype=np.complex128)
        if self.is_annulus:
            return _backend.green_annulus(z, self.base_point, self.inner_radius,
                                          int(self.green_series_terms))
        return _backend.green_disc(z, self.base_point)

    @cached_property
    def saddle(self) -> tuple[complex, float]:
        """Critical point of G and its value; the region {G < -tau} surrounds
        the hole exactly when tau < -value. Disc: no critical point."""
        if not self.is_annulus:
            return 0j, -math.inf
        direction = -self.base_point / abs(self.base_point)
        res = minimize_scalar(lambda r: float(self.green(r * direction)),
                              bounds=(self.inner_radius, 1.0), method="bounded",
                              options={"xatol": 1e-12})
        return complex(res.x * direction), float(res.fun)

    @cached_property
    def shadow_value(self) -> float:
        """Minimum of G over the points hidden from z0 by the hole.

        Sublevel sets {G < -tau} with -tau below this value are fully visible
        along straight rays from z0. Disc: nothing is hidden.
        """
        if not self.is_annulus:
            return 0.0
        c = self.base_point
        rho = self.inner_radius
        half = math.asin(rho / abs(c))
        alphas = np.angle(-c) + np.linspace(-half, half, 401)
        e = np.exp(1j * alphas)
        b = np.real(np.conj(c) * e)
        disc = np.maximum(b * b - abs(c) ** 2 + rho * rho, 0.0)
        s_exit = -b + np.sqrt(disc)
        s_out = -b + np.sqrt(b * b - abs(c) ** 2 + 1.0)
        u = np.linspace(0.0, 1.0, 401)[1:-1]
        s = s_exit[:, None] + (s_out - s_exit)[:, None] * u[None, :]
        return float(self.green(c + s * e[:, None]).min())

    @cached_property
    def conformal_radius(self) -> float:
        """exp(-lim (G(z) - log|z - z0|)) as z -> z0.

        For a simply connected sublevel region {G < -tau} this equals
        e^{-tau} times the modulus of the derivative at z0 of the inverse
        Riemann map. G - log|z - z0| is harmonic near z0, so its mean over a
        small circle equals its value at the center; 32 equispaced angles
        make the quadrature error negligible.
        """
        if not self.is_annulus:
            return 1.0 - abs(self.base_point) ** 2
        eps = 1e-3 * min(1.0 - abs(self.base_point), abs(self.base_point) - self.inner_radius)
        th = 2.0 * math.pi * np.arange(32) / 32
        vals = self.green(self.base_point + eps * np.exp(1j * th)) - math.log(eps)
        return math.exp(-float(np.mean(vals)))

    def describe(self) -> dict:
        return {"shape": self.shape, "z0": [self.base_point.real, self.base_point.imag],
                "rho": self.inner_radius, "green_series_terms": self.green_series_terms}


def _check_interior(domain: DomainModel, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if not np.all(domain.contains(z)):
        raise DomainError(f"point(s) on or outside the boundary of the {domain.shape}")
    return z


def green_value(domain: DomainModel, z):
    """G_Omega(z, z0) at interior points; -inf at z0."""
    zz = _check_interior(domain, z)
    out = domain.green(zz)
    return float(out) if out.ndim == 0 else out


def green_fourier(domain: DomainModel, z, terms: int = 400):
    """Annulus Green function from its Fourier series in the angle.

    Independent of the product formula used by ``green_value``; converges
    geometrically with ratio max(|z0|, rho/|z0|) and serves as a cross-check.
    """
    if not domain.is_annulus:
        raise DomainError("Fourier series form is only defined for the annulus")
    zz = _check_interior(domain, z)
    rho, c = domain.inner_radius, domain.base_point
    s = abs(c)
    r = np.abs(zz)
    phi = np.angle(zz) - np.angle(c)
    harm = (math.log(s) / math.log(rho)) * np.log(r)
    for n in range(1, terms + 1):
        den = n * (1.0 - rho ** (2 * n))
        a_n = ((rho * rho / s) ** n - s ** n) / den
        b_n = rho ** (2 * n) * (s ** n - s ** (-n)) / den
        harm = harm + (a_n * r ** n + b_n * r ** (-n)) * np.cos(n * phi)
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(zz - c)) - harm
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RegionSpec:
    """The open set {z in Omega : scale * G(z, z0) < -level}."""

    domain: DomainModel
    scale: float = 1.0
    level: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("region scale must be positive")
        if self.level < 0:
            raise DomainError("region level must be nonnegative")

    @property
    def green_level(self) -> float:
        """tau with region = {G < -tau}."""
        return self.level / self.scale

    def encloses_hole(self) -> bool:
        return self.domain.is_annulus and self.green_level < -self.domain.saddle[1]


def in_sublevel(region: RegionSpec, z):
    z = np.asarray(z, dtype=np.complex128)
    inside = region.domain.contains(z)
    g = np.where(inside, region.domain.green(np.where(inside, z, 0.5)), 0.0)
    out = inside & (region.scale * g < -region.level)
    return bool(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# ray geometry


def ray_extent(domain: DomainModel, center: complex, angles):
    """Parameter interval (a, b) of center + s e^{i angle} inside the domain.

    ``center`` must be 0 or inside the domain. For the annulus, a ray from an
    interior center stops at the hole.
    """
    e = np.exp(1j * np.asarray(angles, dtype=float))
    c = complex(center)
    b = np.real(np.conj(c) * e)
    c2 = abs(c) ** 2
    s_out = -b + np.sqrt(b * b - c2 + 1.0)
    a = np.zeros_like(s_out)
    if domain.is_annulus:
        rho = domain.inner_radius
        disc = b * b - c2 + rho * rho
        if abs(c) < rho:
            a = -b + np.sqrt(disc)
        else:
            hit = (disc >= 0) & (-b - np.sqrt(np.maximum(disc, 0.0)) > 0)
            s_in = -b - np.sqrt(np.maximum(disc, 0.0))
            s_out = np.where(hit, s_in, s_out)
    return a, s_out


@dataclass
class RayCrossings:
    """Sorted breakpoints per ray: extent ends plus every level crossing."""

    center: complex
    angles: np.ndarray
    breaks: list[np.ndarray] = field(default_factory=list)


def ray_crossings(domain: DomainModel, center: complex, angles, levels,
                  n_samples: int = 256, iterations: int = 60) -> RayCrossings:
    """Locate every crossing of G = level along rays from ``center``.

    Crossings are bracketed on ``n_samples`` points per ray and refined by
    bisection; a pair of crossings closer than one sample spacing can be
    missed (only near tangency).
    """
    angles = np.asarray(angles, dtype=float)
    levels = [float(v) for v in levels if np.isfinite(v)]
    a, b = ray_extent(domain, center, angles)
    e = np.exp(1j * angles)
    u = (np.arange(n_samples) + 0.5) / n_samples
    s = a[:, None] + (b - a)[:, None] * u[None, :]
    g = domain.green(center + s * e[:, None])
    at_pole = abs(complex(center) - domain.base_point) == 0.0
    g_a = np.full(angles.shape, -np.inf if at_pole else 0.0)
    if domain.is_annulus and abs(complex(center)) < domain.inner_radius:
        g_a = np.zeros(angles.shape)
    gg = np.concatenate([g_a[:, None], g, np.zeros((angles.size, 1))], axis=1)
    ss = np.concatenate([a[:, None], s, b[:, None]], axis=1)
    rows, lo_s, hi_s, lvl, sign_lo = [], [], [], [], []
    for level in levels:
        below = gg < level
        change = below[:, 1:] != below[:, :-1]
        ri, ci = np.nonzero(change)
        rows.append(ri)
        lo_s.append(ss[ri, ci])
        hi_s.append(ss[ri, ci + 1])
        lvl.append(np.full(ri.size, level))
        sign_lo.append(below[ri, ci])
    if rows:
        ri = np.concatenate(rows)
        lo = np.concatenate(lo_s)
        hi = np.concatenate(hi_s)
        lv = np.concatenate(lvl)
        blo = np.concatenate(sign_lo)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            gm = domain.green(center + mid * e[ri])
            same = (gm < lv) == blo
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        roots = 0.5 * (lo + hi)
    else:
        ri = np.zeros(0, dtype=int)
        roots = np.zeros(0)
    order = np.argsort(ri, kind="stable")
    ri, roots = ri[order], roots[order]
    splits = np.searchsorted(ri, np.arange(angles.size + 1))
    out = RayCrossings(complex(center), angles)
    for k in range(angles.size):
        inner = roots[splits[k]:splits[k + 1]]
        out.breaks.append(np.unique(np.concatenate([[a[k]], inner, [b[k]]])))
    return out


# ---------------------------------------------------------------------------
# area of sublevel sets


@dataclass
class AreaEstimate:
    value: float
    error: float
    method: str
    resolution: int
    seed: int | None = None
    warning: str | None = None
    window: tuple[complex, float] | None = None


def _grid_area(region: RegionSpec, n: int, chunk: int = 256) -> float:
    dom = region.domain
    r_edges = np.linspace(dom.r_min, 1.0, n + 1)
    dtheta = 2.0 * math.pi / n
    theta = (np.arange(n) + 0.5) * dtheta
    total = 0.0
    for lo in range(0, n, chunk):
        th = theta[lo:lo + chunk]
        z = r_edges[:, None] * np.exp(1j * th)[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            f = region.scale * dom.green(z) + region.level
        # G vanishes on the boundary circles; r = 0 on the disc is the pole
        # only when z0 = 0
        f[-1, :] = region.level
        if dom.is_annulus:
            f[0, :] = region.level
        total += _backend.edge_fraction_area(f, r_edges)
    return total * dtheta


def mc_window(region: RegionSpec, n_rays: int = 512) -> tuple[complex, float]:
    """Disc around z0 containing the region, from ray crossings.

    Falls back to the unit disc when the region is not fully visible from z0
    or touches the domain boundary.
    """
    dom = region.domain
    tau = region.green_level
    if tau <= 0 or -tau >= dom.shadow_value:
        return 0j, 1.0
    angles = 2.0 * math.pi * np.arange(n_rays) / n_rays
    rc = ray_crossings(dom, dom.base_point, angles, [-tau])
    a, b = ray_extent(dom, dom.base_point, angles)
    reach = 0.0
    for k, br in enumerate(rc.breaks):
        if br.size < 3 or br[-2] >= b[k]:
            return 0j, 1.0
        reach = max(reach, br[-2])
    return dom.base_point, min(1.0 + abs(dom.base_point), 1.05 * reach)


def _mc_area(region: RegionSpec, n: int, seed: int, window) -> tuple[float, float, tuple]:
    rng = np.random.Generator(np.random.PCG64(seed))
    if window is None or window == "domain":
        center, radius = 0j, 1.0
    elif window == "auto":
        center, radius = mc_window(region)
    else:
        center, radius = window
    total = 0
    edge_hits = 0
    batch = 1 << 18
    done = 0
    while done < n:
        m = min(batch, n - done)
        rad = radius * np.sqrt(rng.random(m))
        ang = 2.0 * math.pi * rng.random(m)
        z = center + rad * np.exp(1j * ang)
        hit = in_sublevel(region, z)
        total += int(np.count_nonzero(hit))
        edge_hits += int(np.count_nonzero(hit & (rad > 0.98 * radius)))
        done += m
    w_area = math.pi * radius * radius
    p = total / n
    if (center, radius) != (0j, 1.0) and edge_hits:
        # the window clipped the region; redo on the domain window
        return _mc_area(region, n, seed, "domain")
    return w_area * p, w_area * math.sqrt(p * (1.0 - p) / n), (center, radius)


def sublevel_area(region: RegionSpec, method: str = "grid", resolution: int = 1024,
                  seed: int = 0, window="auto") -> AreaEstimate:
    """Lebesgue measure of {scale * G < -level}.

    ``grid``: polar tensor grid over the bounding annulus, level-set position
    inside each boundary cell by linear interpolation, error from comparing
    with half resolution. ``monte-carlo``: ``resolution`` uniform samples in a
    window disc, standard error reported.
    """
    if method == "grid":
        if resolution < 64:
            raise DomainError("grid resolution must be >= 64")
        fine = _grid_area(region, resolution)
        coarse = _grid_area(region, resolution // 2)
        est = AreaEstimate(fine, abs(fine - coarse) / 3.0, "grid", resolution)
    elif method == "monte-carlo":
        if resolution < 10_000:
            raise DomainError("monte-carlo needs >= 1e4 samples")
        val, err, win = _mc_area(region, resolution, seed, window)
        est = AreaEstimate(val, err, "monte-carlo", resolution, seed, window=win)
    else:
        raise DomainError(f"unknown area method {method!r}")
    if est.value == 0.0:
        est.warning = "empty region at this resolution"
        warnings.warn(f"sublevel region at level {region.level} is empty at resolution "
                      f"{resolution}", RuntimeWarning, stacklevel=2)
    return est


def s_trace(domain: DomainModel, t_grid, method: str = "grid", resolution: int = 1024,
            seed: int = 0):
    """s(t) = e^{2t} times the area of {G < -t} on each grid point.

    Area warnings are kept as per-point flags ("empty-region").
    """
    from .diagnostics import Trace

    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(np.diff(t) <= 0) or t[0] < 0:
        raise DomainError("t grid must be nonempty, ascending and nonnegative")
    vals, errs, flags = [], [], []
    for i, ti in enumerate(t):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            est = sublevel_area(RegionSpec(domain, 1.0, float(ti)), method, resolution,
                                seed + i)
        for wmsg in caught:
            warnings.warn(wmsg.message, wmsg.category, stacklevel=2)
        f = math.exp(2.0 * ti)
        vals.append(f * est.value)
        errs.append(f * est.error)
        flags.append("empty-region" if est.warning else "ok")
    return Trace(t, np.array(vals), np.array(errs), "t-axis", "s", flags,
                 {"method": method, "resolution": resolution, "seed": seed,
                  "domain": domain.describe()})
