"""Trace analysis: reparametrization, discrete concavity and linearity,
the two log-concavity predicates and the measure-splitting identity."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError
from .gain import GainFunction, h_value

AXES = ("t-axis", "r-axis")
MIN_SEGMENT_POINTS = 5
KINK_FACTOR = 5.0
TOL_FLOOR = 1e-6


@dataclass
class Trace:
    """Sampled curve with per-point error estimates.

    ``quantity`` names what is sampled; only "-log G" may take negative
    values.
    """

    x: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    axis: str = "t-axis"
    quantity: str = "G"
    flags: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.axis not in AXES:
            raise PreconditionError(f"unknown axis {self.axis!r}")
        if not (self.x.shape == self.values.shape == self.errors.shape):
            raise PreconditionError("trace arrays differ in length")
        if self.x.size > 1 and np.any(np.diff(self.x) <= 0):
            raise PreconditionError("trace abscissae must be strictly ascending")
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("trace values must be finite")
        if self.quantity != "-log G" and np.any(self.values < 0):
            raise PreconditionError("trace values must be nonnegative")
        if np.any(self.errors < 0) or not np.all(np.isfinite(self.errors)):
            raise PreconditionError("error estimates must be finite and nonnegative")
        if self.flags is None:
            self.flags = ["ok"] * self.x.size

    def __len__(self):
        return self.x.size

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 1.0

    def neg_log(self) -> "Trace":
        """-log of a positive trace with first-order error propagation."""
        if np.any(self.values <= 0):
            raise PreconditionError("-log needs positive values")
        return Trace(self.x.copy(), -np.log(self.values), self.errors / self.values,
                     self.axis, "-log G", list(self.flags), dict(self.meta))

    def subset(self, mask) -> "Trace":
        mask = np.asarray(mask, dtype=bool)
        return Trace(self.x[mask], self.values[mask], self.errors[mask], self.axis,
                     self.quantity, [f for f, m in zip(self.flags, mask) if m], dict(self.meta))


def reparametrize(trace: Trace, gain: GainFunction) -> Trace:
    """t-axis -> r-axis with r = h(t); ascending order in r."""
    if trace.axis != "t-axis":
        raise PreconditionError("reparametrize expects a t-axis trace")
    r = h_value(gain, trace.x)
    order = np.argsort(r)
    return Trace(np.asarray(r)[order], trace.values[order], trace.errors[order], "r-axis",
                 trace.quantity, [trace.flags[i] for i in order], dict(trace.meta))


def _triples(x: np.ndarray):
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    return h1, h2, h1 * h2 * (h1 + h2)


def second_differences(trace: Trace) -> tuple[np.ndarray, np.ndarray]:
    """Nonuniform second differences at the middle abscissa of each triple,
    normalized by max |G|."""
    if len(trace) < 3:
        raise PreconditionError("second differences need at least 3 points")
    g = trace.values
    h1, h2, den = _triples(trace.x)
    d = 2.0 * (g[2:] * h1 - g[1:-1] * (h1 + h2) + g[:-2] * h2) / den
    return trace.x[1:-1].copy(), d / trace.scale


def second_difference_errors(trace: Trace) -> np.ndarray:
    """Worst-case propagation of the point errors into each normalized D."""
    e = trace.errors
    h1, h2, den = _triples(trace.x)
    return 2.0 * (e[2:] * h1 + e[1:-1] * (h1 + h2) + e[:-2] * h2) / den / trace.scale


def default_tolerance(trace: Trace, floor: float = TOL_FLOOR) -> float:
    """max(floor, 10 x the largest propagated second-difference error)."""
    if len(trace) < 3:
        return floor
    return max(floor, 10.0 * float(np.max(second_difference_errors(trace))))


@dataclass
class Segment:
    r_lo: float
    r_hi: float
    slope: float
    intercept: float
    max_dev: float
    i_lo: int
    i_hi: int


@dataclass
class Kink:
    x: float
    left_slope: float
    right_slope: float


@dataclass
class ConcavityReport:
    concave: bool
    convex: bool
    tol: float
    worst_positive: float
    worst_positive_at: float
    worst_negative: float
    worst_negative_at: float
    segments: list[Segment]
    kinks: list[Kink]
    propagated_error: float

    @property
    def verdict(self) -> str:
        if self.concave and self.convex:
            return "linear"
        if self.concave:
            return "concave"
        if self.convex:
            return "convex"
        return "neither"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict
        return out


def _fit(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    dev = float(np.max(np.abs(y - (slope * x + intercept))))
    return float(slope), float(intercept), dev


def _segments_from_run(trace: Trace, a: int, b: int, d: np.ndarray, tol: float, out: list):
    """Triples a..b are all flat; points a..b+2. Split at the worst triple
    while the normalized least-squares deviation exceeds tol."""
    lo, hi = a, b + 2
    if hi - lo + 1 < MIN_SEGMENT_POINTS:
        return
    x = trace.x[lo:hi + 1]
    y = trace.values[lo:hi + 1]
    slope, intercept, dev = _fit(x, y)
    if dev / trace.scale <= tol:
        out.append(Segment(float(x[0]), float(x[-1]), slope, intercept,
                           dev / trace.scale, lo, hi))
        return
    if b <= a:
        return
    worst = a + int(np.argmax(np.abs(d[a:b + 1])))
    _segments_from_run(trace, a, worst - 1, d, tol, out)
    _segments_from_run(trace, worst + 1, b, d, tol, out)


def classify(trace: Trace, tol: float) -> ConcavityReport:
    """Concavity/convexity verdicts, maximal linear segments and kinks.

    Refuses (PreconditionError) when ``tol`` is below the propagated error of
    the second differences: such a verdict would read noise as structure.
    """
    if len(trace) < 4:
        raise PreconditionError("classify needs at least 4 points")
    mids, d = second_differences(trace)
    prop = float(np.max(second_difference_errors(trace)))
    if tol < prop:
        raise PreconditionError(
            f"tolerance {tol:.3e} below the propagated error {prop:.3e}; refusing to judge")
    ip = int(np.argmax(d))
    ineg = int(np.argmin(d))
    flat = np.abs(d) <= tol
    segments: list[Segment] = []
    i = 0
    n = d.size
    while i < n:
        if flat[i]:
            j = i
            while j + 1 < n and flat[j + 1]:
                j += 1
            _segments_from_run(trace, i, j, d, tol, segments)
            i = j + 1
        else:
            i += 1
    segments.sort(key=lambda s: s.r_lo)
    kinks = []
    for s1, s2 in zip(segments, segments[1:]):
        if abs(s1.slope - s2.slope) > KINK_FACTOR * tol * trace.scale:
            xk = (s2.intercept - s1.intercept) / (s1.slope - s2.slope)
            kinks.append(Kink(float(xk), s1.slope, s2.slope))
    return ConcavityReport(
        concave=bool(np.all(d <= tol)), convex=bool(np.all(d >= -tol)), tol=tol,
        worst_positive=float(d[ip]), worst_positive_at=float(mids[ip]),
        worst_negative=float(d[ineg]), worst_negative_at=float(mids[ineg]),
        segments=segments, kinks=kinks, propagated_error=prop)


# ---------------------------------------------------------------------------
# predicates


@dataclass
class LemmaConcaveReport:
    neglog_convex: bool
    log_plus_t_nondecreasing: bool
    conclusion_concave: bool
    tolerances: dict

    @property
    def hypotheses_hold(self) -> bool:
        return self.neglog_convex and self.log_plus_t_nondecreasing


def lemma_concave_predicate(x_trace: Trace, tol: float = TOL_FLOOR) -> LemmaConcaveReport:
    """Checks: -log x convex in t, log x(t) + t nondecreasing, and the
    conclusion x(-log r) concave in r. Each test uses
    max(tol, 10 x its propagated error)."""
    if x_trace.axis != "t-axis":
        raise PreconditionError("expects a t-axis trace")
    v = x_trace.values
    if np.any(v <= 0) or np.any(np.diff(v) >= 0):
        raise PreconditionError("x must be strictly positive and strictly decreasing")
    nl = x_trace.neg_log()
    tol1 = default_tolerance(nl, tol)
    rep1 = classify(nl, tol1)
    lpt = -nl.values + x_trace.x
    lpt_err = nl.errors
    steps = np.diff(lpt)
    tol2 = max(tol, 10.0 * float(np.max(lpt_err[1:] + lpt_err[:-1])))
    ok2 = bool(np.all(steps >= -tol2))
    r_trace = reparametrize(x_trace, GainFunction.constant())
    tol3 = default_tolerance(r_trace, tol)
    rep3 = classify(r_trace, tol3)
    return LemmaConcaveReport(rep1.convex, ok2, rep3.concave,
                              {"neglog": tol1, "log_plus_t": tol2, "concave": tol3})


@dataclass
class NotConvexReport:
    predicted: bool
    intercept: float
    confirmed: bool | None
    worst_negative: float | None

    def __bool__(self):
        return self.predicted


def lemma_notconvex_predicate(g_trace: Trace, segment: tuple[float, float], slope: float,
                              intercept: float, tol: float) -> NotConvexReport:
    """Predicts that -log g(e^{-t}) is not convex when g is concave,
    increasing, g(0) ~ 0 and g = a r + b on (r0, 1) with b > 0.

    The prediction is cross-checked by classifying -log g(e^{-t}).
    """
    if g_trace.axis != "r-axis":
        raise PreconditionError("expects an r-axis trace")
    scale = g_trace.scale
    rep = classify(g_trace, max(tol, default_tolerance(g_trace, tol)))
    if not rep.concave:
        raise PreconditionError("g is not concave on the trace")
    if np.any(np.diff(g_trace.values) < -tol * scale):
        raise PreconditionError("g is not increasing on the trace")
    x, y = g_trace.x, g_trace.values
    g0 = y[0] - x[0] * (y[1] - y[0]) / (x[1] - x[0])
    if g0 > tol * scale + 10 * g_trace.errors[0]:
        raise PreconditionError(f"g(0) ~ {g0:.3e} is not ~0")
    r0, r1 = segment
    inside = (x >= r0 - 1e-12) & (x <= r1 + 1e-12)
    if inside.sum() < 2:
        raise PreconditionError("segment holds fewer than 2 samples")
    dev = np.max(np.abs(y[inside] - (slope * x[inside] + intercept)))
    if dev > tol * scale + 10 * float(np.max(g_trace.errors[inside])):
        raise PreconditionError("segment is not linear with the given slope and intercept")
    predicted = intercept > tol * scale
    pos = y > 0
    confirmed = None
    worst = None
    if pos.sum() >= 4:
        t = -np.log(x[pos])[::-1]
        vals = -np.log(y[pos])[::-1]
        errs = (g_trace.errors[pos] / y[pos])[::-1]
        tt = Trace(t, vals, errs, "t-axis", "-log G")
        rep_t = classify(tt, default_tolerance(tt, tol))
        confirmed = not rep_t.convex
        worst = rep_t.worst_negative
    return NotConvexReport(bool(predicted), float(intercept), confirmed, worst)


# ---------------------------------------------------------------------------
# measure splitting


@dataclass(frozen=True)
class Probe:
    """a(t) on [t1, t2]: indicator, or e^{-beta (t - t1)} (exponential window)."""

    kind: str
    t1: float
    t2: float
    beta: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("indicator", "exp-window"):
            raise PreconditionError(f"unknown probe {self.kind!r}")
        if not self.t2 > self.t1 >= 0:
            raise PreconditionError("probe needs 0 <= t1 < t2")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        on = (t >= self.t1) & (t <= self.t2)
        base = np.exp(-self.beta * (t - self.t1)) if self.kind == "exp-window" else 1.0
        return self.amplitude * np.where(on, base, 0.0)

    def exp_moment(self) -> float:
        """int_{t1}^{t2} a(t) e^{-t} dt in closed form."""
        if self.amplitude == 0.0:
            return 0.0
        if self.kind == "indicator":
            return self.amplitude * (math.exp(-self.t1) - math.exp(-self.t2))
        b = self.beta + 1.0
        return self.amplitude * math.exp(self.beta * self.t1) * (
            math.exp(-b * self.t1) - math.exp(-b * self.t2)) / b


@dataclass
class SplittingReport:
    probe: Probe
    lhs: float
    rhs: float
    lhs_error: float
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def splitting_slope(G1: float, G2: float, gain: GainFunction, T1: float, T2: float) -> float:
    """kappa = (G(T1) - G(T2)) / int_{T1}^{T2} c e^{-t}."""
    return (G1 - G2) / (h_value(gain, T1) - h_value(gain, T2))


def measure_splitting_check(w, gain: GainFunction, minimizer, segment: tuple[float, float],
                            kappa: float, probe: Probe, certified: bool = True,
                            drift: float = 0.0, quad=None) -> SplittingReport:
    """Compare int_{-t2 <= psi < -t1} |F|^2 e^{-phi} a(-psi) with
    kappa int_{t1}^{t2} a(t) e^{-t} dt for the extremal F of the segment."""
    from .domain import RegionSpec
    from .quadrature import QuadratureSpec, arc_gauss_nodes, radial_integral

    T1, T2 = segment
    if not certified:
        raise PreconditionError("segment is not certified linear")
    if drift > 1e-6:
        raise PreconditionError(f"minimizer drift {drift:.3e} exceeds 1e-6 on the segment")
    if probe.t1 < T1 - 1e-12 or probe.t2 > T2 + 1e-12:
        raise PreconditionError("probe window leaves the segment")
    rhs = kappa * probe.exp_moment()
    if probe.amplitude == 0.0:
        return SplittingReport(probe, 0.0, rhs, 0.0, abs(rhs), 1e-4)
    tau1 = w.green_level(probe.t1)
    tau2 = w.green_level(probe.t2)

    def weight_of_green(g):
        psi = w.psi_of_green(g)
        return w.form_factor * np.exp(-w.phi_of_green(g)) * probe(-psi)

    if w.domain.is_centered_disc:
        r_out, r_in = math.exp(-tau1), math.exp(-tau2)
        kinks = [math.exp(-lv) for lv in w.kink_green_levels(gain)]

        def f(r):
            return r * _circle_mean_sq(minimizer, r) * float(weight_of_green(math.log(r)))

        res = radial_integral(f, r_out, tol=1e-12, breakpoints=kinks, lower=r_in)
        lhs, err = 2.0 * math.pi * res.value, 2.0 * math.pi * res.error
    else:
        quad = quad or QuadratureSpec("arc-gauss-2d")
        levels = w.kink_green_levels(gain) + [tau2]
        vals = []
        for spec in (quad, quad.coarse()):
            nodes = arc_gauss_nodes(RegionSpec(w.domain, 1.0, tau1), spec.n_r, spec.n_theta,
                                    levels)
            band = nodes.green >= -tau2
            fz = minimizer.evaluate(nodes.z)
            vals.append(float(np.dot(nodes.w * band,
                                     np.abs(fz) ** 2 * weight_of_green(nodes.green))))
        lhs, err = vals[0], abs(vals[0] - vals[1])
    scale = max(abs(lhs), abs(rhs), 1e-300)
    residual = abs(lhs - rhs) / scale
    tolerance = max(1e-4, 10.0 * err / scale)
    return SplittingReport(probe, lhs, rhs, err, residual, tolerance)


def _circle_mean_sq(minimizer, r: float) -> float:
    """(1/2pi) int |F(r e^{i theta})|^2 d theta."""
    basis = minimizer.basis
    powers = getattr(basis, "powers", None)
    if basis is not None and not getattr(basis, "orthonormal", True) and basis.center == 0:
        p = np.asarray(powers, dtype=float)
        x = np.abs(minimizer.x) ** 2
        return float(np.sum(x * (r / basis.scale) ** (2 * p)))
    th = 2 * math.pi * (np.arange(256) + 0.5) / 256
    fz = minimizer.evaluate(r * np.exp(1j * th))
    return float(np.mean(np.abs(fz) ** 2))


def report_to_json(report) -> dict:
    """JSON-ready dict of any report dataclass (numpy scalars converted)."""
    def conv(v):
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [conv(x) for x in v]
        if isinstance(v, np.ndarray):
            return [conv(x) for x in v.tolist()]
        if isinstance(v, (np.floating, np.integer, np.bool_)):
            return v.item()
        if isinstance(v, complex):
            return [v.real, v.imag]
        return v
    d = report.to_dict() if hasattr(report, "to_dict") else asdict(report)
    return conv(d)
