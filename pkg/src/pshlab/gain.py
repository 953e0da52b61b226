"""Gain functions c(t) and the reparametrization h(t) = int_t^inf c(s) e^{-s} ds.

Only symbolic families with closed-form h are supported, so that h^{-1} is
exact up to bisection tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, RangeError

KINDS = ("constant", "piecewise-constant", "exponential-tilt")

BISECTION_RTOL = 1e-12
BISECTION_MAXITER = 200


@dataclass(frozen=True)
class GainFunction:
    """Symbolic gain on [0, inf).

    ``piecewise-constant`` takes ``values[i]`` on ``[breakpoints[i-1],
    breakpoints[i])`` (right-continuous), ``constant`` takes ``values[0]``
    everywhere and ``exponential-tilt`` is ``values[0] * exp(tilt * t)``.
    """

    kind: str = "constant"
    values: tuple[float, ...] = (1.0,)
    breakpoints: tuple[float, ...] = ()
    tilt: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown gain kind {self.kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        if any(v <= 0 or not math.isfinite(v) for v in self.values):
            raise DomainError("gain values must be positive and finite")
        if self.kind == "piecewise-constant":
            if len(self.values) != len(self.breakpoints) + 1:
                raise DomainError("piecewise gain needs len(values) == len(breakpoints) + 1")
            if any(b <= 0 for b in self.breakpoints):
                raise DomainError("gain breakpoints must be positive")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise DomainError("gain breakpoints must be strictly ascending")
        elif len(self.values) != 1:
            raise DomainError(f"{self.kind} gain takes exactly one value")

    @classmethod
    def constant(cls, value: float = 1.0) -> "GainFunction":
        return cls("constant", (value,))

    @classmethod
    def piecewise(cls, values, breakpoints) -> "GainFunction":
        return cls("piecewise-constant", tuple(values), tuple(breakpoints))

    @classmethod
    def exponential(cls, tilt: float, scale: float = 1.0) -> "GainFunction":
        return cls("exponential-tilt", (scale,), (), float(tilt))

    @property
    def is_unit(self) -> bool:
        return self.kind == "constant" and self.values[0] == 1.0

    def describe(self) -> dict:
        return {"kind": self.kind, "values": list(self.values),
                "breakpoints": list(self.breakpoints), "tilt": self.tilt}


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"gain evaluated at negative or nan t: {t!r}")
    return arr


def eval_c(gain: GainFunction, t):
    """c(t); vectorized over ``t``."""
    arr = _check_t(t)
    if gain.kind == "constant":
        out = np.full(arr.shape, gain.values[0])
    elif gain.kind == "exponential-tilt":
        out = gain.values[0] * np.exp(gain.tilt * arr)
    else:
        idx = np.searchsorted(np.asarray(gain.breakpoints), arr, side="right")
        out = np.asarray(gain.values)[idx]
    return float(out) if out.ndim == 0 else out


def _c_left(gain: GainFunction, t: float) -> float:
    """Left limit c(t-) for t > 0."""
    if gain.kind != "piecewise-constant":
        return float(eval_c(gain, t))
    idx = int(np.searchsorted(np.asarray(gain.breakpoints), t, side="left"))
    return gain.values[idx]


def h_value(gain: GainFunction, t):
    """h(t) = int_t^inf c(s) e^{-s} ds in closed form; vectorized over ``t``."""
    arr = _check_t(t)
    if gain.kind == "constant":
        out = gain.values[0] * np.exp(-arr)
    elif gain.kind == "exponential-tilt":
        rate = 1.0 - gain.tilt
        if rate <= 0:
            raise DomainError(f"h is infinite for tilt {gain.tilt} >= 1")
        out = gain.values[0] * np.exp(-rate * arr) / rate
    else:
        edges = (0.0,) + gain.breakpoints + (math.inf,)
        out = np.zeros(arr.shape)
        for v, lo, hi in zip(gain.values, edges[:-1], edges[1:]):
            a = np.maximum(arr, lo)
            out += np.where(a < hi, v * (np.exp(-a) - math.exp(-hi)), 0.0)
    return float(out) if out.ndim == 0 else out


def h_inverse(gain: GainFunction, r: float) -> float:
    """The t >= 0 with h(t) = r, for 0 < r <= h(0)."""
    h0 = h_value(gain, 0.0)
    if not (0 < r <= h0 * (1 + 1e-15)):
        raise RangeError(f"r={r!r} outside (0, h(0)={h0!r}]")
    if r >= h0:
        return 0.0
    if gain.kind == "constant":
        return math.log(gain.values[0] / r)
    lo, hi = 0.0, 1.0
    while h_value(gain, hi) > r:
        lo, hi = hi, 2.0 * hi
    for _ in range(BISECTION_MAXITER):
        mid = 0.5 * (lo + hi)
        hm = h_value(gain, mid)
        if hm == r:
            return mid
        if hm > r:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    t = 0.5 * (lo + hi)
    if abs(h_value(gain, t) - r) > BISECTION_RTOL * h0:
        raise RangeError(f"bisection for h^-1({r!r}) did not converge")
    return t


@dataclass
class GainReport:
    passed: bool
    failures: list[str] = field(default_factory=list)
    checked_points: int = 0


def validate_gain(gain: GainFunction, grid_points: int = 200, t_max: float = 60.0) -> GainReport:
    """Check positivity and that c(t) e^{-t} is nonincreasing on [0, t_max]."""
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    ts = np.concatenate([[0.0], np.geomspace(1e-3, t_max, grid_points - 1)])
    ts = np.union1d(ts, [b for b in gain.breakpoints if b <= t_max])
    failures = []
    with np.errstate(over="ignore"):
        cvals = np.atleast_1d(eval_c(gain, ts))
    if np.any(~(cvals > 0)):
        failures.append("c(t) must be positive")
    # compare in log space to avoid underflow of e^{-t}
    logw = np.log(cvals) - ts
    steps = np.diff(logw)
    bad = np.nonzero(steps > 1e-12)[0]
    if bad.size:
        i = int(bad[0])
        failures.append(
            f"c(t)e^(-t) increases between t={ts[i]:.6g} and t={ts[i + 1]:.6g}")
    for b in gain.breakpoints:
        left, right = _c_left(gain, b), float(eval_c(gain, b))
        if right > left * (1 + 1e-12):
            failures.append(
                f"c(t)e^(-t) jumps up at breakpoint t={b:g} ({left:g} -> {right:g})")
    if gain.kind == "exponential-tilt" and gain.tilt >= 1:
        failures.append(f"tilt {gain.tilt} >= 1 makes h infinite")
    return GainReport(passed=not failures, failures=failures, checked_points=int(ts.size))
