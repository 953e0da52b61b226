"""Integration engines: adaptive radial quadrature and 2D integration over
Green sublevel regions.

Every integral returns a ``QuadResult`` carrying a value, an error estimate
and a flag. Three 2D engines share one node-set interface:

``polar-grid-2d``
    midpoint rule on the polar tensor grid over the bounding annulus, the
    integrand masked by sublevel membership; error from the half-resolution
    grid.
``arc-gauss-2d``
    exact geometry. With z0 rotated onto the positive axis, G(r e^{i theta})
    increases with |theta| on every circle, so a sublevel region meets each
    circle in one arc |theta| < theta*(r). Radial panels end at every radius
    where some level curve is tangent to a circle (square-root behaviour,
    removed by a cosine map); each arc is split where deeper levels cross it,
    so densities that are smooth functions of G between kink levels are
    integrated by plain Gauss-Legendre products.
``adaptive-1d``
    radial densities on the centered disc, through ``radial_integral``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .domain import DomainModel, RegionSpec, in_sublevel
from .errors import DomainError

METHODS = ("adaptive-1d", "polar-grid-2d", "arc-gauss-2d")
_DEFAULT_NODES = {"adaptive-1d": (64, 64), "polar-grid-2d": (1024, 1024),
                  "arc-gauss-2d": (48, 64)}

FLAG_OK = "ok"
FLAG_TOL = "tolerance-not-met"
FLAG_DEPTH = "max-depth"
_FLAG_RANK = {FLAG_OK: 0, FLAG_TOL: 1, FLAG_DEPTH: 2}


def worst_flag(flags) -> str:
    worst = FLAG_OK
    for f in flags:
        if _FLAG_RANK.get(f, 3) > _FLAG_RANK.get(worst, 3):
            worst = f
    return worst


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "arc-gauss-2d"
    n_r: int | None = None
    n_theta: int | None = None
    tol: float = 1e-6
    max_depth: int = 50

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown quadrature method {self.method!r}")
        nr, nt = _DEFAULT_NODES[self.method]
        if self.n_r is None:
            object.__setattr__(self, "n_r", nr)
        if self.n_theta is None:
            object.__setattr__(self, "n_theta", nt)
        if self.n_r < 16 or self.n_theta < 16:
            raise DomainError("quadrature needs at least 16 nodes per axis")
        if not 1e-14 <= self.tol <= 1e-2:
            raise DomainError("quadrature tolerance must lie in [1e-14, 1e-2]")
        if self.max_depth < 1:
            raise DomainError("max_depth must be positive")

    def coarse(self) -> "QuadratureSpec":
        """Companion spec used for the error estimate.

        The masked grid converges at first order, so halving gives the
        Richardson estimate directly. Gauss rules converge fast enough that a
        half-size rule is itself unresolved and would only measure its own
        error; the companion uses three quarters of the nodes instead.
        """
        if self.method == "arc-gauss-2d":
            nr, nt = (3 * self.n_r) // 4, (3 * self.n_theta) // 4
        else:
            nr, nt = self.n_r // 2, self.n_theta // 2
        return QuadratureSpec(self.method, max(16, nr), max(16, nt), self.tol, self.max_depth)

    def for_degree(self, degree: int) -> "QuadratureSpec":
        """Raise the Gauss node counts so products of powers up to ``degree``
        (in absolute value) stay resolved: n_r >= 2 degree, n_theta >= 3 degree."""
        if self.method != "arc-gauss-2d":
            return self
        nr = max(self.n_r, 2 * degree)
        nt = max(self.n_theta, 3 * degree)
        return QuadratureSpec(self.method, nr, nt, self.tol, self.max_depth)


@dataclass
class QuadResult:
    value: float
    error: float
    flag: str = FLAG_OK

    @property
    def ok(self) -> bool:
        return self.flag == FLAG_OK


# ---------------------------------------------------------------------------
# 1D


def radial_integral(f, R: float, tol: float = 1e-10, breakpoints=(), lower: float = 0.0,
                    max_depth: int = 50) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of f over (lower, R].

    Interior ``breakpoints`` (kinks of the integrand) are forced subdivision
    points. Integrable endpoint singularities are allowed.
    """
    if not R > lower:
        raise DomainError("radial_integral needs R > lower")
    pts = sorted(p for p in breakpoints if lower < p < R)
    val, err, info, *rest = integrate.quad(
        f, lower, R, points=pts or None, epsabs=0.0, epsrel=tol,
        limit=max(max_depth, 2 * len(pts) + 2) * 4, full_output=1)
    ier = rest[0] if rest and isinstance(rest[0], int) else 0
    flag = FLAG_OK
    if ier == 1:
        flag = FLAG_DEPTH
    elif err > max(tol * abs(val), 1e-300) or ier not in (0, 2):
        flag = FLAG_TOL
    elif ier == 2 and err > 10 * tol * abs(val):
        flag = FLAG_TOL
    return QuadResult(float(val), float(err), flag)


def radial_integral_vec(f, R: float, tol: float = 1e-10, breakpoints=(), lower: float = 0.0,
                        max_depth: int = 50) -> tuple[np.ndarray, float, str]:
    """Vector-valued adaptive integral of f over (lower, R] (one shared
    subdivision for all components). The error is a max-norm bound, so the
    components should be of comparable size."""
    if not R > lower:
        raise DomainError("radial_integral_vec needs R > lower")
    pts = sorted(p for p in breakpoints if lower < p < R)
    val, err, info = integrate.quad_vec(f, lower, R, epsabs=0.0, epsrel=tol, norm="max",
                                        points=pts or None, limit=200 * max_depth,
                                        full_output=True)
    scale = float(np.max(np.abs(val))) if np.size(val) else 0.0
    if info.status == 1:
        flag = FLAG_DEPTH
    elif err > max(10 * tol * scale, 1e-300):
        flag = FLAG_TOL
    else:
        flag = FLAG_OK
    return np.asarray(val, dtype=float), float(err), flag


# ---------------------------------------------------------------------------
# node sets


@dataclass
class NodeSet:
    """Quadrature nodes with area weights and the Green value at each node."""

    z: np.ndarray
    w: np.ndarray
    green: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.w, values))


def polar_grid_nodes(region: RegionSpec, n_r: int, n_theta: int) -> NodeSet:
    """Masked midpoint nodes: half-cell shifted polar grid over the bounding
    annulus, keeping only cell centers inside the region."""
    dom = region.domain
    r0 = dom.r_min
    dr = (1.0 - r0) / n_r
    dth = 2.0 * math.pi / n_theta
    r = r0 + (np.arange(n_r) + 0.5) * dr
    th = (np.arange(n_theta) + 0.5) * dth
    z = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    w = np.repeat(r * dr * dth, n_theta)
    keep = in_sublevel(region, z)
    z = z[keep]
    return NodeSet(z, w[keep], dom.green(z))


@dataclass
class CutCells:
    """Polar grid cells crossed by the region boundary."""

    z: np.ndarray
    area: np.ndarray
    corner_fraction: np.ndarray
    masked_in: np.ndarray


def polar_cut_cells(region: RegionSpec, n_r: int, n_theta: int) -> CutCells:
    """Cells of the polar grid whose corners disagree on sublevel membership.

    ``corner_fraction`` is the share of inside corners, a crude estimate of
    the covered fraction; ``masked_in`` is the membership of the cell center
    used by the masked midpoint rule. Corners on the domain boundary are
    pulled inward by 1e-9 so that the boundary circles themselves, where the
    Green function carries rounding of order 1e-13, do not count as cuts.
    """
    dom = region.domain
    r0 = dom.r_min
    dr = (1.0 - r0) / n_r
    dth = 2.0 * math.pi / n_theta
    r_edges = np.clip(r0 + np.arange(n_r + 1) * dr, r0 + 1e-9, 1.0 - 1e-9)
    th_edges = np.arange(n_theta + 1) * dth
    corners = in_sublevel(region, r_edges[:, None] * np.exp(1j * th_edges)[None, :])
    c = corners.astype(np.int8)
    total = c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:] + c[1:, 1:]
    ir, it = np.nonzero((total > 0) & (total < 4))
    rc = r0 + (ir + 0.5) * dr
    z = rc * np.exp(1j * (it + 0.5) * dth)
    return CutCells(z, rc * dr * dth, total[ir, it] / 4.0, in_sublevel(region, z))


def masking_error(region: RegionSpec, spec: "QuadratureSpec", density) -> float:
    """Error estimate of the masked midpoint rule from the cut cells.

    Two terms, the larger wins: the signed sum of (covered share - mask)
    times cell mass, which catches boundaries running along grid circles
    where all cells err alike; and the random-sign model in which each cell
    errs uniformly within +-(cell mass), variance mass^2 / 3.
    """
    cut = polar_cut_cells(region, spec.n_r, spec.n_theta)
    if cut.z.size == 0:
        return 0.0
    mass = cut.area * np.abs(density(cut.z))
    signed = abs(float(np.sum((cut.corner_fraction - cut.masked_in) * mass)))
    return max(signed, float(np.sqrt(np.sum(mass ** 2) / 3.0)))


def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass
class _AxisProfile:
    """Green function restricted to the two halves of the real axis through
    z0, in the frame where z0 > 0."""

    domain: DomainModel

    def __post_init__(self):
        d = self.domain
        self.rot = np.exp(1j * np.angle(d.base_point)) if d.base_point != 0 else 1.0
        self.s = abs(d.base_point)
        self.r0 = d.r_min
        if d.is_annulus:
            sad = d.saddle
            self.neg_min_r = abs(sad[0])
            self.neg_min = sad[1]
        else:
            self.neg_min_r = 0.0
            self.neg_min = math.log(self.s) if self.s > 0 else -math.inf

    def g(self, w):
        return self.domain.green(np.asarray(w) * self.rot)

    def fpos(self, r):
        return float(self.g(r))

    def fneg(self, r):
        return float(self.g(-r))

    def _root(self, f, a, b):
        return brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)

    def _near_pole(self, side: float, lev: float) -> float:
        """A radius on the given side of s where G < -lev."""
        delta = 0.25 * min(self.s - self.r0, 1.0 - self.s)
        while self.fpos(self.s + side * delta) >= -lev:
            delta *= 0.5
            if delta < 1e-300:
                raise DomainError(f"level {lev} too deep to bracket")
        return self.s + side * delta

    def pos_range(self, lev: float):
        """Radii where the circle meets {G < -lev}: an interval around s."""
        if lev <= 0.0:
            return self.r0, 1.0
        if self.s == 0.0:
            return self.r0, math.exp(-lev)
        fn = lambda r: self.fpos(r) + lev
        if self.r0 == 0.0 and self.fpos(0.0) < -lev:
            lo = 0.0
        else:
            lo = self._root(fn, self.r0, self._near_pole(-1.0, lev))
        hi = self._root(fn, self._near_pole(1.0, lev), 1.0)
        return lo, hi

    def full_range(self, lev: float):
        """Radii whose whole circle lies in {G < -lev}, or None."""
        if lev <= 0.0:
            return self.r0, 1.0
        if self.s == 0.0:
            return self.r0, math.exp(-lev)
        if not self.neg_min < -lev:
            return None
        fn = lambda r: self.fneg(r) + lev
        if self.domain.is_annulus:
            lo = self._root(fn, self.r0, self.neg_min_r)
        else:
            lo = 0.0
        hi = self._root(fn, self.neg_min_r, 1.0)
        return lo, hi


def _arc_limits(prof: _AxisProfile, r: np.ndarray, lev: float, iterations: int = 56):
    """theta*(r) for the level ``lev``: 0 when the circle misses the region,
    pi when the whole circle is inside."""
    if prof.s == 0.0:
        return np.where(r < math.exp(-lev), math.pi, 0.0)
    gp = prof.g(r)
    gn = prof.g(-r)
    out = np.where(gn < -lev, math.pi, 0.0)
    mid_idx = np.nonzero((gp < -lev) & ~(gn < -lev))[0]
    if mid_idx.size:
        rr = r[mid_idx]
        lo = np.zeros(rr.size)
        hi = np.full(rr.size, math.pi)
        for _ in range(iterations):
            m = 0.5 * (lo + hi)
            inside = prof.g(rr * np.exp(1j * m)) < -lev
            lo = np.where(inside, m, lo)
            hi = np.where(inside, hi, m)
        out[mid_idx] = 0.5 * (lo + hi)
    return out


def arc_gauss_nodes(region: RegionSpec, n_r: int, n_theta: int, levels=()) -> NodeSet:
    """Gauss product nodes fitted to the arcs of {G < -tau}.

    ``levels`` are further Green levels (deeper than tau) across which the
    density is not smooth; the node set resolves them exactly.
    """
    dom = region.domain
    tau = region.green_level
    levs = sorted({tau, *[float(v) for v in levels if v > tau and np.isfinite(v)]})
    prof = _AxisProfile(dom)
    r_lo, r_hi = prof.pos_range(tau)
    cuts = {r_lo, r_hi}
    if prof.s > 0:
        cuts.add(prof.s)
    for lev in levs:
        cuts.update(prof.pos_range(lev))
        fr = prof.full_range(lev)
        if fr is not None:
            cuts.update(fr)
    cuts = np.array(sorted(c for c in cuts if r_lo <= c <= r_hi))
    cuts = cuts[np.concatenate([[True], np.diff(cuts) > 1e-14 * r_hi])]
    u, wu = _gauss01(n_r)
    x = 0.5 * (1.0 - np.cos(math.pi * u))
    dx = 0.5 * math.pi * np.sin(math.pi * u) * wu
    a, b = cuts[:-1], cuts[1:]
    r = (a[:, None] + (b - a)[:, None] * x[None, :]).ravel()
    wr = ((b - a)[:, None] * dx[None, :]).ravel() * r
    # arc limits: deepest level first gives ascending theta*
    lims = [np.zeros_like(r)] + [_arc_limits(prof, r, lev) for lev in reversed(levs)]
    v, wv = _gauss01(n_theta)
    zs, ws = [], []
    for lo, hi in zip(lims[:-1], lims[1:]):
        span = hi - lo
        sel = span > 0
        if not np.any(sel):
            continue
        rr, lo_s, sp, wrr = r[sel], lo[sel], span[sel], wr[sel]
        th = lo_s[:, None] + sp[:, None] * v[None, :]
        w = (wrr * sp)[:, None] * wv[None, :]
        zz = rr[:, None] * np.exp(1j * th)
        zs += [zz.ravel(), np.conj(zz).ravel()]
        ws += [w.ravel(), w.ravel()]
    if not zs:
        return NodeSet(np.zeros(0, complex), np.zeros(0), np.zeros(0))
    z = np.concatenate(zs) * prof.rot
    w = np.concatenate(ws)
    return NodeSet(z, w, dom.green(z))


def region_nodes(region: RegionSpec, spec: QuadratureSpec, levels=()) -> NodeSet:
    if spec.method == "polar-grid-2d":
        return polar_grid_nodes(region, spec.n_r, spec.n_theta)
    if spec.method == "arc-gauss-2d":
        return arc_gauss_nodes(region, spec.n_r, spec.n_theta, levels)
    raise DomainError(f"method {spec.method!r} has no 2D node set")


def region_integral(density, region: RegionSpec, spec: QuadratureSpec | None = None,
                    levels=()) -> QuadResult:
    """Integral of ``density`` (vectorized in z) over the sublevel region.

    ``levels`` lists Green levels where the density has kinks or jumps (used
    by the arc engine). The error is the difference to the coarse companion
    grid; for the masked midpoint grid, whose boundary cells converge at first
    order, the difference itself is the Richardson estimate.
    """
    spec = spec or QuadratureSpec()
    if spec.method == "adaptive-1d":
        raise DomainError("use radial_integral for adaptive-1d")
    fine_nodes = region_nodes(region, spec, levels)
    coarse_nodes = region_nodes(region, spec.coarse(), levels)
    fine = fine_nodes.integrate(density(fine_nodes.z)) if fine_nodes.z.size else 0.0
    coarse = coarse_nodes.integrate(density(coarse_nodes.z)) if coarse_nodes.z.size else 0.0
    err = abs(fine - coarse)
    if spec.method == "polar-grid-2d":
        # the two masked grids can agree by accident
        err = max(err, masking_error(region, spec, density))
    flag = FLAG_OK if err <= spec.tol * max(abs(fine), 1e-300) else FLAG_TOL
    return QuadResult(fine, err, flag)
