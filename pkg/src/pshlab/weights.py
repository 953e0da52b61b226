"""Weight constructions (phi, psi) on planar domains.

Every construction here is a function of the Green value gamma = G(z, z0):
psi = P(gamma), phi = F(gamma). Consequently each sublevel set {psi < -t} is
a Green sublevel set {G < -tau(t)}, and the integrand density
e^{-phi} c(-psi) is a function of gamma alone. The quadrature and solver
modules rely on both facts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainModel, _check_interior
from .errors import DomainError, EvaluationError
from .gain import GainFunction, eval_c

CONSTRUCTIONS = ("radial-example", "char-construction", "power-green", "plain-power")
OBJECT_KINDS = ("form", "function")


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-linear convex increasing g on (-inf, 0) with g(0-) = 0.

    ``slopes[i]`` applies on (breakpoints[i-1], breakpoints[i]) with the
    conventions breakpoints[-1] = -inf and breakpoints[m] = 0.
    """

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    anchor: float | None = None

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        sl = tuple(float(s) for s in self.slopes)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", sl)
        if len(sl) != len(bp) + 1:
            raise DomainError("a profile with m breakpoints needs m + 1 slopes")
        if any(b >= 0 for b in bp) or any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise DomainError("breakpoints must be ascending and negative")
        if not sl[0] > 0:
            raise DomainError("first slope must be positive (g increasing)")
        if any(s2 < s1 for s1, s2 in zip(sl, sl[1:])):
            raise DomainError("slopes must be nondecreasing (g convex)")
        # values at breakpoints, integrating back from g(0) = 0
        vals = []
        acc = 0.0
        edges = list(bp) + [0.0]
        for i in range(len(bp) - 1, -1, -1):
            acc -= sl[i + 1] * (edges[i + 1] - edges[i])
            vals.append(acc)
        vals.reverse()
        object.__setattr__(self, "_values", tuple(vals))
        if self.anchor is not None and bp:
            if abs(self.anchor - vals[0]) > 1e-12 * max(1.0, abs(vals[0])):
                raise DomainError(
                    f"anchor g(x1) = {self.anchor} is inconsistent with g(0-) = 0 "
                    f"(expected {vals[0]})")

    @classmethod
    def linear(cls, slope: float) -> "RadialProfile":
        return cls((), (slope,))

    @classmethod
    def from_convex_function(cls, fn, dfn, x_lo: float, pieces: int) -> "RadialProfile":
        """Chordal piecewise-linear refinement of a smooth convex g on
        [x_lo, 0] with ``pieces`` equal pieces; slope dfn(x_lo) below x_lo."""
        xs = np.linspace(x_lo, 0.0, pieces + 1)
        ys = np.array([fn(x) for x in xs]) - fn(0.0)
        chords = np.diff(ys) / np.diff(xs)
        slopes = (min(float(dfn(x_lo)), chords[0]),) + tuple(float(c) for c in chords)
        return cls(tuple(float(x) for x in xs[:-1]), slopes)

    @property
    def values(self) -> tuple[float, ...]:
        """g at the breakpoints."""
        return self._values

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp = np.array(self.breakpoints + (0.0,))
        vals = np.array(self._values + (0.0,))
        sl = np.array(self.slopes)
        idx = np.searchsorted(bp, x, side="left")
        idx = np.minimum(idx, len(sl) - 1)
        ref = np.minimum(idx, len(bp) - 1)
        out = vals[ref] + sl[idx] * (x - bp[ref])
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        """g^{-1}(y) for y < 0."""
        y = np.asarray(y, dtype=float)
        bp = np.array(self.breakpoints + (0.0,))
        vals = np.array(self._values + (0.0,))
        sl = np.array(self.slopes)
        idx = np.searchsorted(vals, y, side="left")
        idx = np.minimum(idx, len(sl) - 1)
        ref = np.minimum(idx, len(bp) - 1)
        out = bp[ref] + (y - vals[ref]) / sl[idx]
        return float(out) if out.ndim == 0 else out

    def slope_at(self, x: float) -> float:
        i = int(np.searchsorted(np.array(self.breakpoints), x, side="right"))
        return self.slopes[i]


@dataclass(frozen=True)
class WeightPair:
    construction: str
    domain: DomainModel
    object_kind: str = "function"
    profile: RadialProfile | None = None
    a: float | None = None
    k: int | None = None
    jet_target: tuple[complex, ...] = field(default=())

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise DomainError(f"unknown construction {self.construction!r}")
        if self.object_kind not in OBJECT_KINDS:
            raise DomainError(f"unknown object kind {self.object_kind!r}")
        c = self.construction
        if c in ("radial-example", "plain-power") and not self.domain.is_centered_disc:
            raise DomainError(f"{c} lives on the unit disc with z0 = 0")
        if c == "radial-example" and self.profile is None:
            raise DomainError("radial-example needs a RadialProfile")
        if c == "char-construction" and not (self.a is not None and self.a < 0):
            raise DomainError("char-construction needs a < 0")
        if c in ("power-green", "plain-power"):
            if self.k is None or int(self.k) != self.k or self.k < 0:
                raise DomainError(f"{c} needs an integer k >= 0")
        jets = tuple(complex(v) for v in self.jet_target) or self._default_jets()
        object.__setattr__(self, "jet_target", jets)
        if len(jets) != jet_order_of(self):
            raise DomainError(
                f"jet target has length {len(jets)}, construction requires {jet_order_of(self)}")
        if not any(v != 0 for v in jets):
            raise DomainError("jet target must not vanish identically")

    def _default_jets(self):
        if self.construction == "plain-power":
            raise DomainError("plain-power needs an explicit jet list (a_0..a_k)")
        if self.construction == "power-green":
            return (1.0 + 0j,) + (0j,) * int(self.k)
        return (1.0 + 0j,)

    # -- factories ---------------------------------------------------------
    @classmethod
    def radial_example(cls, profile: RadialProfile, object_kind: str = "form"):
        return cls("radial-example", DomainModel.disc(0j), object_kind, profile=profile)

    @classmethod
    def char_construction(cls, a: float, domain: DomainModel | None = None,
                          object_kind: str = "form"):
        return cls("char-construction", domain or DomainModel.disc(0j), object_kind, a=a)

    @classmethod
    def power_green(cls, k: int, domain: DomainModel, object_kind: str = "function"):
        return cls("power-green", domain, object_kind, k=k)

    @classmethod
    def plain_power(cls, k: int, jets, object_kind: str = "function"):
        return cls("plain-power", DomainModel.disc(0j), object_kind, k=k,
                   jet_target=tuple(jets))

    # -- profiles as functions of the Green value --------------------------
    @property
    def form_factor(self) -> float:
        return 2.0 if self.object_kind == "form" else 1.0

    def psi_of_green(self, g):
        g = np.asarray(g, dtype=float)
        c = self.construction
        if c == "radial-example":
            return self.profile(g)
        if c == "char-construction":
            return g + np.maximum(g, self.a)
        return 2.0 * (self.k + 1) * g

    def phi_of_green(self, g):
        g = np.asarray(g, dtype=float)
        c = self.construction
        if c == "radial-example":
            return 2.0 * g - self.profile(g)
        if c == "char-construction":
            return np.minimum(g, self.a)
        return np.zeros_like(g)

    def density_of_green(self, gain: GainFunction, g):
        """e^{-phi} c(-psi) (times 2 for forms) as a function of gamma; no
        finiteness checks (quadrature nodes avoid the pole)."""
        g = np.asarray(g, dtype=float)
        psi = self.psi_of_green(g)
        phi = self.phi_of_green(g)
        return self.form_factor * np.exp(-phi) * eval_c(gain, np.maximum(-psi, 0.0))

    def green_level(self, t: float) -> float:
        """tau(t) >= 0 with {psi < -t} = {G < -tau}."""
        if t < 0:
            raise DomainError("level t must be nonnegative")
        c = self.construction
        if c == "radial-example":
            tau = -self.profile.inverse(-t) if t > 0 else 0.0
        elif c == "char-construction":
            tau = t + self.a if t >= -2.0 * self.a else t / 2.0
        else:
            tau = t / (2.0 * (self.k + 1))
        return max(float(tau), 0.0)

    def level_of_green(self, tau: float) -> float:
        """Inverse of ``green_level`` on tau > 0: t = -psi at gamma = -tau."""
        return float(-self.psi_of_green(-tau))

    def kink_green_levels(self, gain: GainFunction | None = None) -> list[float]:
        """Green levels tau > 0 where the density is not smooth."""
        out = []
        c = self.construction
        if c == "radial-example":
            out += [-x for x in self.profile.breakpoints]
        elif c == "char-construction":
            out.append(-self.a)
        if gain is not None:
            out += [self.green_level(b) for b in gain.breakpoints]
        return sorted({v for v in out if v > 0})

    def pole_exponent(self, gain: GainFunction) -> float:
        """beta with density ~ |z - z0|^(-beta) at the pole."""
        c = self.construction
        lam = gain.tilt if gain.kind == "exponential-tilt" else 0.0
        if c == "radial-example":
            s0 = self.profile.slopes[0]
            return 2.0 - s0 + lam * s0
        if c == "char-construction":
            return 1.0 + lam
        return 2.0 * (self.k + 1) * lam

    def boundary_slope(self) -> float:
        """d psi / d gamma as gamma -> 0-."""
        c = self.construction
        if c == "radial-example":
            return self.profile.slopes[-1]
        if c == "char-construction":
            return 2.0
        return 2.0 * (self.k + 1)

    def describe(self) -> dict:
        out = {"construction": self.construction, "object_kind": self.object_kind,
               "domain": self.domain.describe(),
               "jet_target": [[v.real, v.imag] for v in self.jet_target]}
        if self.profile is not None:
            out["profile"] = {"breakpoints": list(self.profile.breakpoints),
                              "slopes": list(self.profile.slopes)}
        if self.a is not None:
            out["a"] = self.a
        if self.k is not None:
            out["k"] = self.k
        return out


def jet_order_of(w: WeightPair) -> int:
    """Number of prescribed Taylor coefficients at z0."""
    if w.construction in ("power-green", "plain-power"):
        return int(w.k) + 1
    return 1


def _green_at(w: WeightPair, z):
    zz = _check_interior(w.domain, z)
    return w.domain.green(zz)


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def eval_psi(w: WeightPair, z):
    g = _green_at(w, z)
    with np.errstate(invalid="ignore"):
        return _out(w.psi_of_green(g))


def eval_phi(w: WeightPair, z):
    g = _green_at(w, z)
    with np.errstate(invalid="ignore"):
        return _out(w.phi_of_green(g))


def density(w: WeightPair, gain: GainFunction, z):
    g = _green_at(w, z)
    with np.errstate(over="ignore", invalid="ignore"):
        val = w.density_of_green(gain, g)
    bad = ~np.isfinite(val)
    if np.any(bad):
        where = np.asarray(z, dtype=complex)[bad] if np.ndim(z) else complex(z)
        raise EvaluationError("density is not finite", point=where)
    return _out(val)


# ---------------------------------------------------------------------------
# admissibility checks


@dataclass
class WeightReport:
    passed: bool
    failures: list[str]
    sup_psi: float
    min_density_on_rings: float


def validate_weight(w: WeightPair, gain: GainFunction, n_angles: int = 256) -> WeightReport:
    """Numerical checks of the admissibility of (phi, psi, c).

    sup psi = 0 (ring at distance 1e-3 from the outer boundary), psi <= 0 on
    a sample grid, a positive lower bound of the density on rings away from
    z0, and local integrability of the density at the pole (the jet target
    has a nonzero constant term, so the density itself must be integrable).
    """
    dom = w.domain
    failures = []
    th = 2.0 * math.pi * (np.arange(n_angles) + 0.5) / n_angles
    ring = (1.0 - 1e-3) * np.exp(1j * th)
    sup_psi = float(np.max(eval_psi(w, ring)))
    tol = 5e-3 * w.boundary_slope()
    if sup_psi < -tol or sup_psi > 0:
        failures.append(f"sup psi on the boundary ring is {sup_psi:.3e}, expected 0")
    radii = np.linspace(dom.r_min, 1.0, 18)[1:-1]
    zs = (radii[:, None] * np.exp(1j * th)[None, :]).ravel()
    zs = zs[np.abs(zs - dom.base_point) > 1e-2]
    psi = eval_psi(w, zs)
    if np.any(psi > 1e-12):
        failures.append("psi is positive somewhere")
    dens = density(w, gain, zs)
    lo = float(np.min(dens))
    if not lo > 0:
        failures.append("density has no positive lower bound on compact rings")
    if w.pole_exponent(gain) >= 2.0:
        failures.append(
            f"density ~ |z - z0|^-{w.pole_exponent(gain):.3g} is not integrable at z0")
    return WeightReport(not failures, failures, sup_psi, lo)


def radial_profile_convex(w: WeightPair, n: int = 400, x_lo: float = -8.0) -> bool:
    """phi + psi as a function of x = log|z| has nondecreasing slopes
    (subharmonicity for radial weights)."""
    if not w.domain.is_centered_disc:
        raise DomainError("profile convexity applies to radial weights")
    x = np.linspace(x_lo, -1e-6, n)
    f = w.psi_of_green(x) + w.phi_of_green(x)
    slopes = np.diff(f) / np.diff(x)
    return bool(np.all(np.diff(slopes) >= -1e-9 * max(1.0, np.max(np.abs(slopes)))))
