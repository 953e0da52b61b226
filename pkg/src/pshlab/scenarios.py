"""Scenario catalogue, configuration files, orchestration and emitters.

A configuration file is flat ``key = value`` text; keys have at most one dot
(``domain.shape``, ``weight.a``, ``gain.kind``). Lines starting with ``#`` are
comments. Every scenario has a complete set of defaults, so a file only needs
the ``scenario`` key.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from ._backend import BACKEND
from .bergman import BasisSpec, default_solver_setup, extremal_trace
from .diagnostics import (Probe, Trace, classify, default_tolerance, lemma_concave_predicate,
                          lemma_notconvex_predicate, measure_splitting_check, report_to_json,
                          reparametrize, second_differences, splitting_slope)
from .domain import DomainModel, s_trace
from .errors import ConfigError, PreconditionError, PshlabError
from .gain import GainFunction, h_inverse, h_value, validate_gain
from .quadrature import METHODS, QuadratureSpec
from .weights import RadialProfile, WeightPair, validate_weight

ORACLE_TOL = 1e-6
SLOPE_TOL = 1e-3
NONCONVEX_LEVEL = -1e-4
DRIFT_LIMIT = 1e-6
PROBES_PER_SEGMENT = 3
DECAY_RATIO = 0.05
STATUSES = ("ok", "inconclusive", "failed")


# ---------------------------------------------------------------------------
# catalogue


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    statement: str
    expectation: str
    defaults: dict


_COMMON = {
    "seed": "0",
    "output.dir": "",
    "gain.kind": "constant",
    "gain.value": "1",
    "gain.values": "",
    "gain.breakpoints": "",
    "gain.tilt": "0",
    "grid.points": "64",
    "grid.t_max": "auto",
    "grid.spacing": "r",
    "basis.n_min": "auto",
    "basis.n_max": "auto",
    "basis.escalate_to": "0",
    "quad.method": "auto",
    "quad.n_r": "auto",
    "quad.n_theta": "auto",
    "quad.tol": "1e-6",
}

CATALOGUE = {
    e.name: e for e in [
        CatalogueEntry(
            "radial-partial-linearity",
            "radial weights psi = g(log|z|): G(-log r) is linear exactly where g' is constant",
            "one linear segment per linear piece of g, boundaries at r = e^{g(x_i)}; "
            "a chordal refinement of a strictly convex g gives several slopes",
            {"weight.slopes": "2,3", "weight.breakpoints": "-1", "weight.object": "form",
             "grid.points": "200", "refine.pieces": "8"}),
        CatalogueEntry(
            "char-two-segment",
            "psi = G + max(G, a), phi = min(G, a) on the disc: two linear segments and a "
            "non-convex -log G",
            "kink at r = e^{2a}, slopes 4 pi e^{-a} and 2 pi e^{-a}",
            {"domain.shape": "unit-disc", "domain.z0": "0", "weight.a": "-0.5",
             "weight.object": "form", "grid.points": "128"}),
        CatalogueEntry(
            "closed-form-jets",
            "psi = 2(k+1) log|z| with prescribed jets a_0..a_k at 0",
            "G(t) = sum |a_j|^2 pi/(j+1) e^{-(j+1)t/(k+1)}; -log G strictly concave once "
            "two jets are nonzero",
            {"weight.k": "1", "weight.jets": "1,1", "grid.spacing": "t"}),
        CatalogueEntry(
            "annulus-kscan",
            "psi = 2(k+1) G on the annulus, k = 0..k_max: G_k(-log r) concave for every k",
            "concavity per k; convexity verdict of -log G_k reported (exploratory)",
            {"domain.shape": "annulus", "domain.rho": "0.2", "domain.z0": "auto",
             "scan.k_max": "12", "basis.n_min": "-24", "basis.n_max": "24",
             "basis.escalate_to": "48", "grid.points": "40"}),
        CatalogueEntry(
            "sublevel-geometry",
            "s(t) = e^{2t} area{G < -t}: nonincreasing, constant on the disc with centered pole",
            "disc values equal the automorphism formula (pi for a centered pole); "
            "annulus values strictly decreasing",
            {"domain.shape": "annulus", "domain.rho": "0.2", "domain.z0": "0.45",
             "area.disc_centers": "0,0.4", "area.method": "monte-carlo",
             "area.samples": "1000000", "area.t_step": "0.3", "grid.points": "8"}),
        CatalogueEntry(
            "bergman-logconvex",
            "Bergman kernel of {2G < -t} (k = 0) on the disc and the annulus: -log G convex",
            "B(t=0) = 1/pi on the disc; -log G convex; the concavity predicate holds",
            {"domain.rho": "0.2", "domain.z0": "0.45", "grid.points": "48"}),
    ]
}


# ---------------------------------------------------------------------------
# configuration


def parse_config_text(text: str, source: str = "<string>") -> dict:
    """Flat ``key = value`` lines; duplicate keys and nested sections are errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key.count(".") > 1:
            raise ConfigError(f"{source}:{lineno}: key {key!r} nests deeper than one section")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()] if s.strip() else []


@dataclass
class ScenarioConfig:
    """Merged configuration: catalogue defaults, then the file, then overrides."""

    scenario: str
    values: dict
    source: str | None = None

    @classmethod
    def build(cls, mapping: dict, overrides: dict | None = None, source: str | None = None):
        mapping = dict(mapping)
        name = mapping.pop("scenario", None)
        if name is None:
            raise ConfigError(f"{source or 'config'}: missing 'scenario' key")
        if name not in CATALOGUE:
            raise ConfigError(f"unknown scenario {name!r}; known: {', '.join(CATALOGUE)}")
        values = dict(_COMMON)
        values.update(CATALOGUE[name].defaults)
        for key, val in list(mapping.items()) + list((overrides or {}).items()):
            if key not in values:
                raise ConfigError(f"key {key!r} is not used by scenario {name!r}")
            values[key] = str(val)
        return cls(name, values, source)

    # -- raw typed access --------------------------------------------------
    def get(self, key: str) -> str:
        return self.values[key]

    def number(self, key: str, kind=float):
        try:
            return kind(self.values[key])
        except ValueError as exc:
            raise ConfigError(f"{key} = {self.values[key]!r} is not a valid {kind.__name__}") \
                from exc

    def maybe(self, key: str, kind=float):
        v = self.values.get(key, "auto")
        return None if v in ("auto", "") else self.number(key, kind)

    def floats(self, key: str) -> list[float]:
        try:
            return _floats(self.values[key])
        except ValueError as exc:
            raise ConfigError(f"{key} = {self.values[key]!r} is not a list of numbers") from exc

    def complexes(self, key: str) -> list[complex]:
        try:
            return [complex(v.strip()) for v in self.values[key].split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"{key} = {self.values[key]!r} is not a list of complex "
                              "numbers") from exc

    # -- typed views ---------------------------------------------------------
    @property
    def seed(self) -> int:
        return self.number("seed", int)

    @property
    def t_points(self) -> int:
        return self.number("grid.points", int)

    def out_root(self) -> str:
        return self.values["output.dir"] or os.environ.get("PSHLAB_OUT") or "pshlab_out"

    def t_max(self, k: int | None = None) -> float:
        v = self.maybe("grid.t_max")
        if v is not None:
            return v
        if self.scenario == "closed-form-jets":
            return 4.0 * (self.number("weight.k", int) + 1)
        if k is not None:
            return max(8.0, 4.0 * (k + 1))
        return 8.0

    def gain(self) -> GainFunction:
        kind = self.values["gain.kind"]
        try:
            if kind == "constant":
                return GainFunction.constant(self.number("gain.value"))
            if kind == "piecewise-constant":
                return GainFunction.piecewise(self.floats("gain.values"),
                                              self.floats("gain.breakpoints"))
            if kind == "exponential-tilt":
                return GainFunction.exponential(self.number("gain.tilt"),
                                                self.number("gain.value"))
        except PshlabError as exc:
            raise ConfigError(f"gain: {exc}") from exc
        raise ConfigError(f"unknown gain.kind {kind!r}")

    def domain(self) -> DomainModel:
        shape = self.values.get("domain.shape", "unit-disc")
        try:
            if shape == "unit-disc":
                z0 = complex(self.values.get("domain.z0", "0"))
                return DomainModel.disc(z0)
            if shape == "annulus":
                rho = self.number("domain.rho")
                z0 = self.values.get("domain.z0", "auto")
                return DomainModel.annulus(rho, None if z0 == "auto" else complex(z0))
        except ValueError as exc:
            raise ConfigError(f"domain: {exc}") from exc
        raise ConfigError(f"unknown domain.shape {shape!r}")

    def annulus(self) -> DomainModel:
        z0 = self.values.get("domain.z0", "auto")
        try:
            return DomainModel.annulus(self.number("domain.rho"),
                                       None if z0 == "auto" else complex(z0))
        except ValueError as exc:
            raise ConfigError(f"domain: {exc}") from exc

    def basis(self) -> BasisSpec | None:
        lo, hi = self.maybe("basis.n_min", int), self.maybe("basis.n_max", int)
        if lo is None and hi is None:
            return None
        if hi is None:
            raise ConfigError("basis.n_min given without basis.n_max")
        if lo is None:
            lo = 0
        try:
            return BasisSpec(lo, hi)
        except PshlabError as exc:
            raise ConfigError(f"basis: {exc}") from exc

    def escalate_to(self) -> int | None:
        """Cap for basis escalation on basis-unstable points; 0 disables it."""
        cap = self.number("basis.escalate_to", int)
        if cap < 0:
            raise ConfigError("basis.escalate_to must be >= 0")
        return cap or None

    def quad(self) -> QuadratureSpec | None:
        method = self.values["quad.method"]
        if method == "auto":
            return None
        if method not in METHODS:
            raise ConfigError(f"unknown quad.method {method!r}")
        try:
            return QuadratureSpec(method, self.maybe("quad.n_r", int),
                                  self.maybe("quad.n_theta", int), self.number("quad.tol"))
        except PshlabError as exc:
            raise ConfigError(f"quad: {exc}") from exc

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, **dict(sorted(self.values.items()))}


def load_config(path: str, overrides: dict | None = None) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return ScenarioConfig.build(parse_config_text(text, path), overrides, path)


def _weights_for(cfg: ScenarioConfig) -> list[WeightPair]:
    """Every weight pair the scenario will use (for validation)."""
    name = cfg.scenario
    try:
        if name == "radial-partial-linearity":
            out = [WeightPair.radial_example(_profile(cfg), cfg.values["weight.object"])]
            if cfg.number("refine.pieces", int) > 0:
                out.append(WeightPair.radial_example(_refined_profile(cfg),
                                                     cfg.values["weight.object"]))
            return out
        if name == "char-two-segment":
            return [WeightPair.char_construction(cfg.number("weight.a"), cfg.domain(),
                                                 cfg.values["weight.object"])]
        if name == "closed-form-jets":
            return [WeightPair.plain_power(cfg.number("weight.k", int),
                                           cfg.complexes("weight.jets"))]
        if name == "annulus-kscan":
            dom = cfg.annulus()
            return [WeightPair.power_green(k, dom)
                    for k in range(cfg.number("scan.k_max", int) + 1)]
        if name == "bergman-logconvex":
            return [WeightPair.power_green(0, DomainModel.disc(0j)),
                    WeightPair.power_green(0, cfg.annulus())]
        return []
    except ConfigError:
        raise
    except PshlabError as exc:
        raise ConfigError(f"weight: {exc}") from exc


def _profile(cfg: ScenarioConfig) -> RadialProfile:
    try:
        return RadialProfile(tuple(cfg.floats("weight.breakpoints")),
                             tuple(cfg.floats("weight.slopes")))
    except PshlabError as exc:
        raise ConfigError(f"weight profile: {exc}") from exc


def _refined_profile(cfg: ScenarioConfig) -> RadialProfile:
    """Chordal refinement of the strictly convex quadratic whose slope runs
    from the first to the last slope of the main profile over [x_1, 0]."""
    base = _profile(cfg)
    s0, s1 = base.slopes[0], base.slopes[-1]
    x_lo = base.breakpoints[0] if base.breakpoints else -1.0
    if not s1 > s0:
        raise ConfigError("refinement needs a profile with increasing slopes")
    c = (s1 - s0) / (2.0 * -x_lo)
    return RadialProfile.from_convex_function(lambda x: s1 * x + c * x * x,
                                              lambda x: s1 + 2 * c * x, x_lo,
                                              cfg.number("refine.pieces", int))


def validate_config(cfg: ScenarioConfig) -> list[str]:
    """All problems found, as messages; empty when the config is runnable."""
    problems = []

    def attempt(fn):
        try:
            return fn()
        except ConfigError as exc:
            problems.append(str(exc))
        except PshlabError as exc:
            problems.append(str(exc))
        return None

    gain = attempt(cfg.gain)
    if gain is not None:
        rep = validate_gain(gain)
        problems += [f"gain invariant violated: {f}" for f in rep.failures]
    n = attempt(lambda: cfg.t_points)
    if n is not None and n < 4:
        problems.append("grid.points must be at least 4")
    if cfg.values["grid.spacing"] not in ("r", "t"):
        problems.append("grid.spacing must be 'r' or 't'")
    tm = attempt(cfg.t_max)
    if tm is not None and not tm > 0:
        problems.append("grid.t_max must be positive")
    attempt(lambda: cfg.seed)
    attempt(cfg.basis)
    attempt(cfg.escalate_to)
    attempt(cfg.quad)
    if "domain.shape" in cfg.values:
        attempt(cfg.domain)
    weights = attempt(lambda: _weights_for(cfg)) or []
    if gain is not None and not problems:
        for w in weights:
            rep = validate_weight(w, gain)
            problems += [f"weight {w.construction}: {f}" for f in rep.failures]
    if cfg.scenario == "sublevel-geometry":
        attempt(lambda: cfg.complexes("area.disc_centers"))
        if cfg.values["area.method"] not in ("grid", "monte-carlo"):
            problems.append("area.method must be 'grid' or 'monte-carlo'")
        attempt(lambda: cfg.number("area.samples", int))
        attempt(lambda: cfg.number("area.t_step"))
    return problems


# ---------------------------------------------------------------------------
# grids


def make_t_grid(gain: GainFunction, n: int, t_max: float, spacing: str = "r") -> np.ndarray:
    """Ascending t grid on [0, t_max]: uniform in r = h(t) or uniform in t."""
    if n < 2:
        raise ConfigError("a grid needs at least 2 points")
    if spacing == "t":
        return np.linspace(0.0, t_max, n)
    r = np.linspace(h_value(gain, t_max), h_value(gain, 0.0), n)
    t = np.array([h_inverse(gain, float(ri)) for ri in r[1:-1]])[::-1]
    return np.concatenate([[0.0], t, [t_max]])


# ---------------------------------------------------------------------------
# results


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    expected: bool = True  # exploratory checks are reported, never judged


@dataclass
class ScenarioResult:
    scenario: str
    status: str = "ok"
    traces: dict = field(default_factory=dict)
    segments: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    splitting: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    wall_clock: float = 0.0
    files: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def check(self, name: str, passed: bool, detail: str, expected: bool = True):
        self.checks.append(Check(name, bool(passed), detail, expected))

    def failed_checks(self) -> list[Check]:
        return [c for c in self.checks if c.expected and not c.passed]

    def finalize_status(self) -> str:
        failed = self.failed_checks()
        if self.flags:
            # flagged numerics make a failed expectation unprovable
            self.status = "inconclusive"
        elif failed:
            self.status = "failed"
        else:
            self.status = "ok"
        return self.status


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _note_flags(result: ScenarioResult, label: str, trace: Trace):
    for x, f in zip(trace.x, trace.flags):
        if f != "ok":
            result.flags.append(f"{label}@{_fmt(x)}:{f}")


def _oracle_entry(result: ScenarioResult, label: str, x, values, oracle, tol: float):
    values = np.asarray(values, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    dev = np.abs(values - oracle) / np.abs(oracle)
    result.oracle[label] = {"x": x, "oracle": oracle, "computed": values,
                            "max_rel_dev": float(np.max(dev)), "tol": tol}
    result.check(f"{label}: oracle agreement", float(np.max(dev)) <= tol,
                 f"max relative deviation {np.max(dev):.3e} (tol {tol:g})")


def _distinct_slopes(segments, rel: float = 1e-4) -> int:
    if not segments:
        return 0
    s = np.sort([seg.slope for seg in segments])
    scale = max(float(np.max(np.abs(s))), 1e-300)
    return 1 + int(np.count_nonzero(np.diff(s) > rel * scale))


def _g_study(result: ScenarioResult, label: str, w: WeightPair, gain: GainFunction,
             basis, quad, t_grid, splitting: bool = True, progress=None,
             escalate_to: int | None = None):
    """Trace, r-reparametrization, concavity verdicts, monotonicity, decay and
    measure splitting on certified segments."""
    basis, quad = default_solver_setup(w, basis, quad)
    et = extremal_trace(w, gain, basis, t_grid, quad, progress=progress,
                        escalate_to=escalate_to)
    tr = et.trace
    rtr = reparametrize(tr, gain)
    rep = classify(rtr, default_tolerance(rtr))
    nl = tr.neg_log()
    nl_rep = classify(nl, default_tolerance(nl))
    result.traces[f"{label}_t"] = tr
    result.traces[f"{label}_r"] = rtr
    result.traces[f"{label}_neglog"] = nl
    result.segments[label] = rep.segments
    result.reports[label] = {"r_concavity": report_to_json(rep),
                             "neglog_t": report_to_json(nl_rep)}
    _note_flags(result, label, tr)
    result.check(f"{label}: G(-log r) concave", rep.concave,
                 f"max normalized second difference {rep.worst_positive:.3e} "
                 f"(tol {rep.tol:.3e})")
    steps = np.diff(tr.values)
    slack = tr.errors[1:] + tr.errors[:-1]
    result.check(f"{label}: nonincreasing", bool(np.all(steps <= slack)),
                 f"largest increase {np.max(steps):.3e}")
    t_max = float(tr.x[-1])
    if t_max >= 6:
        ratio = tr.values[-1] / tr.values[0]
        result.check(f"{label}: decay", ratio <= DECAY_RATIO,
                     f"G(t_max)/G(0) = {ratio:.3e} at t_max = {t_max:g}")
    if splitting:
        _splitting(result, label, w, gain, et, rep, quad, basis)
    return et, rep, nl_rep


def _splitting(result, label, w, gain, et, rep, quad, basis):
    tr = et.trace
    n = len(tr)
    certified_any = False
    all_ok = True
    for seg in rep.segments:
        j1, j2 = n - 1 - seg.i_hi, n - 1 - seg.i_lo
        T1, T2 = float(tr.x[j1]), float(tr.x[j2])
        drift = et.max_drift(j1, j2)
        entry = {"trace": label, "r_lo": seg.r_lo, "r_hi": seg.r_hi, "T1": T1, "T2": T2,
                 "drift": drift, "certified": drift <= DRIFT_LIMIT, "probes": []}
        result.splitting.append(entry)
        if drift > DRIFT_LIMIT:
            continue
        certified_any = True
        kappa = splitting_slope(tr.values[j1], tr.values[j2], gain, T1, T2)
        edges = np.linspace(T1, T2, PROBES_PER_SEGMENT + 1)
        q = quad.for_degree(max(abs(basis.n_min), abs(basis.n_max)) + 8) \
            if quad.method == "arc-gauss-2d" else None
        for a, b in zip(edges[:-1], edges[1:]):
            sr = measure_splitting_check(w, gain, et.results[j1], (T1, T2), kappa,
                                         Probe("indicator", float(a), float(b)),
                                         certified=True, drift=drift, quad=q)
            entry["probes"].append({"t1": float(a), "t2": float(b), "lhs": sr.lhs,
                                    "rhs": sr.rhs, "residual": sr.residual,
                                    "tolerance": sr.tolerance, "passed": sr.passed})
            all_ok &= sr.passed
    if certified_any:
        worst = max(p["residual"] for e in result.splitting if e["trace"] == label
                    for p in e["probes"])
        result.check(f"{label}: measure splitting", all_ok,
                     f"worst indicator residual {worst:.3e}")


# ---------------------------------------------------------------------------
# scenario runners


def _kink_check(result, label, segments, kinks_r, r_grid):
    step = float(np.max(np.diff(r_grid)))
    inside = [k for k in kinks_r if r_grid[0] < k < r_grid[-1]]
    result.check(f"{label}: segment count", len(segments) == len(inside) + 1,
                 f"{len(segments)} maximal linear segments, expected {len(inside) + 1}")
    if len(segments) != len(inside) + 1:
        return
    worst = 0.0
    for s1, s2, k in zip(segments, segments[1:], inside):
        worst = max(worst, abs(s1.r_hi - k), abs(s2.r_lo - k))
    result.check(f"{label}: segment boundaries", worst <= step,
                 f"largest boundary offset {worst:.3e} (grid step {step:.3e})")


def _run_radial(cfg: ScenarioConfig, result: ScenarioResult, progress=None):
    gain = cfg.gain()
    studies = [("profile", _profile(cfg))]
    if cfg.number("refine.pieces", int) > 0:
        studies.append(("refined", _refined_profile(cfg)))
    t_grid = make_t_grid(gain, cfg.t_points, cfg.t_max(), cfg.values["grid.spacing"])
    for label, prof in studies:
        w = WeightPair.radial_example(prof, cfg.values["weight.object"])
        et, rep, _ = _g_study(result, label, w, gain, cfg.basis(), cfg.quad(), t_grid,
                              progress=progress)
        if gain.kind == "constant":
            _oracle_entry(result, label, t_grid, et.trace.values,
                          oracles.radial_profile(prof, t_grid, w.form_factor, gain.values[0]),
                          ORACLE_TOL)
            rtr = result.traces[f"{label}_r"]
            if label == "profile":
                _kink_check(result, label, rep.segments, oracles.radial_kinks(prof), rtr.x)
        if label == "refined":
            m = _distinct_slopes(rep.segments)
            result.check(f"{label}: distinct slopes", m >= 3,
                         f"{m} distinct segment slopes over {len(rep.segments)} segments")


def _run_char(cfg: ScenarioConfig, result: ScenarioResult, progress=None):
    gain = cfg.gain()
    a = cfg.number("weight.a")
    w = WeightPair.char_construction(a, cfg.domain(), cfg.values["weight.object"])
    t_grid = make_t_grid(gain, cfg.t_points, cfg.t_max(), cfg.values["grid.spacing"])
    et, rep, nl_rep = _g_study(result, "char", w, gain, cfg.basis(), cfg.quad(), t_grid,
                               progress=progress)
    rtr = result.traces["char_r"]
    if not nl_rep.convex and nl_rep.worst_negative <= NONCONVEX_LEVEL:
        detail = f"min normalized second difference {nl_rep.worst_negative:.3e}"
        result.check("char: -log G not convex", True, detail)
    else:
        result.check("char: -log G not convex", False,
                     f"min normalized second difference {nl_rep.worst_negative:.3e}")
    exact = w.domain.is_centered_disc and gain.is_unit and w.object_kind == "form"
    if exact:
        _oracle_entry(result, "char", t_grid, et.trace.values,
                      oracles.char_two_segment(a, t_grid), ORACLE_TOL)
        kink = math.exp(2 * a)
        _kink_check(result, "char", rep.segments, [kink], rtr.x)
        if len(rep.segments) == 2:
            want = oracles.char_slopes(a)
            errs = [abs(s.slope - v) / v for s, v in zip(rep.segments, want)]
            result.check("char: slopes", max(errs) <= SLOPE_TOL,
                         f"relative slope errors {errs[0]:.3e}, {errs[1]:.3e}")
            step = float(np.max(np.diff(rtr.x)))
            xk = rep.kinks[0].x if rep.kinks else float("nan")
            result.check("char: kink location", abs(xk - kink) <= step,
                         f"kink at r = {xk:.6f}, expected {kink:.6f} (grid step {step:.3e})")
            outer = rep.segments[-1]
            try:
                nc = lemma_notconvex_predicate(rtr, (outer.r_lo, 1.0), outer.slope,
                                               outer.intercept, rep.tol)
                result.reports["char"]["notconvex_predicate"] = report_to_json(nc)
                result.check("char: non-convexity predicate", bool(nc.predicted)
                             and nc.confirmed is not False,
                             f"intercept {nc.intercept:.6g}, confirmed {nc.confirmed}")
            except PreconditionError as exc:
                result.check("char: non-convexity predicate", False, str(exc))


def _run_jets(cfg: ScenarioConfig, result: ScenarioResult, progress=None):
    gain = cfg.gain()
    k = cfg.number("weight.k", int)
    jets = cfg.complexes("weight.jets")
    w = WeightPair.plain_power(k, jets)
    t_grid = make_t_grid(gain, cfg.t_points, cfg.t_max(), cfg.values["grid.spacing"])
    et, _, _ = _g_study(result, "jets", w, gain, cfg.basis(), cfg.quad(), t_grid,
                        progress=progress)
    if gain.kind == "constant":
        _oracle_entry(result, "jets", t_grid, et.trace.values,
                      gain.values[0] * oracles.closed_form_jets(k, jets, t_grid), ORACLE_TOL)
    if sum(1 for a in jets if a != 0) >= 2:
        _, d = second_differences(result.traces["jets_neglog"])
        result.check("jets: -log G strictly concave",
                     bool(np.all(d <= 0) and np.min(d) <= NONCONVEX_LEVEL),
                     f"max {np.max(d):.3e}, min {np.min(d):.3e}")


def _run_kscan(cfg: ScenarioConfig, result: ScenarioResult, progress=None):
    gain = cfg.gain()
    dom = cfg.annulus()
    verdicts = []
    for k in range(cfg.number("scan.k_max", int) + 1):
        w = WeightPair.power_green(k, dom)
        t_grid = make_t_grid(gain, cfg.t_points, cfg.t_max(k), cfg.values["grid.spacing"])
        label = f"k{k:02d}"
        et, rep, nl_rep = _g_study(result, label, w, gain, cfg.basis(), cfg.quad(), t_grid,
                                   progress=progress, escalate_to=cfg.escalate_to())
        verdicts.append({"k": k, "neglog_verdict": nl_rep.verdict, "convex": nl_rep.convex,
                         "worst_negative": nl_rep.worst_negative,
                         "worst_negative_at": nl_rep.worst_negative_at,
                         "tol": nl_rep.tol, "r_concave": rep.concave})
        result.check(f"{label}: -log G convex", nl_rep.convex,
                     f"verdict {nl_rep.verdict}, min normalized second difference "
                     f"{nl_rep.worst_negative:.3e} (tol {nl_rep.tol:.3e})", expected=False)
        if k == 0 and gain.is_unit:
            b0 = oracles.annulus_bergman_min(dom.inner_radius, dom.base_point)
            _oracle_entry(result, label, t_grid[:1], et.trace.values[:1], [b0], ORACLE_TOL)
    result.reports["kscan"] = verdicts


def _run_geometry(cfg: ScenarioConfig, result: ScenarioResult, progress=None):
    n = cfg.t_points
    step = cfg.number("area.t_step")
    t = step * np.arange(n)
    method = cfg.values["area.method"]
    res = cfg.number("area.samples", int)
    seed = cfg.seed
    domains = [(f"disc_{abs(c):g}", DomainModel.disc(c))
               for c in cfg.complexes("area.disc_centers")]
    domains.append(("annulus", cfg.annulus()))
    for i, (label, dom) in enumerate(domains):
        tr = s_trace(dom, t, method, res, seed + 1000 * i)
        result.traces[f"s_{label}"] = tr
        _note_flags(result, f"s_{label}", tr)
        if progress is not None:
            progress(i, label, tr)
        if not dom.is_annulus:
            want = oracles.disc_s(dom.base_point, t)
            dev = np.abs(tr.values - want)
            ok = bool(np.all(dev <= 3 * tr.errors + 1e-12 * want))
            result.oracle[f"s_{label}"] = {"x": t, "oracle": want, "computed": tr.values,
                                            "max_rel_dev": float(np.max(dev / want)),
                                            "tol": "3 sigma"}
            noisy = tr.errors > 0
            worst = float(np.max(dev[noisy] / tr.errors[noisy])) if np.any(noisy) else 0.0
            result.check(f"s_{label}: oracle within 3 sigma", ok,
                         f"max |s - oracle| / sigma = {worst:.2f}, "
                         f"max relative deviation {np.max(dev / want):.3e}")
        else:
            diffs = tr.values[:-1] - tr.values[1:]
            sig = np.sqrt(tr.errors[:-1] ** 2 + tr.errors[1:] ** 2)
            margin = diffs - 3 * sig
            result.check("s_annulus: strictly decreasing beyond 3 sigma",
                         bool(np.all(margin > 0)),
                         f"smallest decrease {np.min(diffs):.4g}, largest 3 sigma "
                         f"{np.max(3 * sig):.3g}")


def _run_bergman(cfg: ScenarioConfig, result: ScenarioResult, progress=None):
    gain = cfg.gain()
    cases = [("disc", DomainModel.disc(0j)), ("annulus", cfg.annulus())]
    for label, dom in cases:
        w = WeightPair.power_green(0, dom)
        t_grid = make_t_grid(gain, cfg.t_points, cfg.t_max(), cfg.values["grid.spacing"])
        basis = cfg.basis() if dom.is_annulus else None
        et, rep, nl_rep = _g_study(result, label, w, gain, basis, cfg.quad(), t_grid,
                                   progress=progress, escalate_to=cfg.escalate_to())
        tr = et.trace
        result.check(f"{label}: -log G convex", nl_rep.convex,
                     f"verdict {nl_rep.verdict}, min normalized second difference "
                     f"{nl_rep.worst_negative:.3e} (tol {nl_rep.tol:.3e})")
        if gain.is_unit:
            if dom.is_annulus:
                _oracle_entry(result, label, t_grid[:1], tr.values[:1],
                              [oracles.annulus_bergman_min(dom.inner_radius, dom.base_point)],
                              ORACLE_TOL)
                # beyond twice the saddle depth the region no longer surrounds the hole
                simple = t_grid > -2.0 * dom.saddle[1]
                if np.any(simple):
                    _oracle_entry(result, f"{label}_simply_connected", t_grid[simple],
                                  tr.values[simple],
                                  oracles.simply_connected_min(dom.conformal_radius,
                                                               t_grid[simple]),
                                  ORACLE_TOL)
            else:
                _oracle_entry(result, label, t_grid, tr.values,
                              oracles.disc_power_green(0, t_grid), ORACLE_TOL)
        try:
            lp = lemma_concave_predicate(tr)
            result.reports[label]["concave_predicate"] = {
                "hypotheses_hold": lp.hypotheses_hold, "conclusion": lp.conclusion_concave,
                "neglog_convex": lp.neglog_convex,
                "log_plus_t_nondecreasing": lp.log_plus_t_nondecreasing,
                "tolerances": lp.tolerances}
            result.check(f"{label}: concavity predicate",
                         lp.hypotheses_hold and lp.conclusion_concave,
                         f"hypotheses {lp.hypotheses_hold}, conclusion "
                         f"{lp.conclusion_concave}")
        except PreconditionError as exc:
            result.check(f"{label}: concavity predicate", False, str(exc))
        result.reports[label]["kernel_at_0"] = 1.0 / tr.values[0]


_RUNNERS = {
    "radial-partial-linearity": _run_radial,
    "char-two-segment": _run_char,
    "closed-form-jets": _run_jets,
    "annulus-kscan": _run_kscan,
    "sublevel-geometry": _run_geometry,
    "bergman-logconvex": _run_bergman,
}


def run_scenario(cfg: ScenarioConfig, write: bool = True, progress=None) -> ScenarioResult:
    """Validate, run the pipeline, judge the expectations and (optionally)
    write CSV and JSON under <out root>/<scenario>/."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    result = ScenarioResult(cfg.scenario, config=cfg.to_dict())
    start = time.perf_counter()
    _RUNNERS[cfg.scenario](cfg, result, progress)
    result.wall_clock = time.perf_counter() - start
    result.finalize_status()
    if write:
        out = os.path.join(cfg.out_root(), cfg.scenario)
        result.files = emit_csv(result, out)
        result.files.append(emit_json(result, os.path.join(out, "report.json")))
    return result


# ---------------------------------------------------------------------------
# emitters


TRACE_HEADER = ("axis", "value", "error", "flag")
SEGMENT_HEADER = ("r_lo", "r_hi", "slope", "intercept", "max_dev")


def _write_rows(path: str, header, rows):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([_fmt(v) for v in row])
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return path


def write_trace_csv(trace: Trace | None, path: str) -> str:
    rows = [] if trace is None else zip(trace.x, trace.values, trace.errors, trace.flags)
    return _write_rows(path, TRACE_HEADER, rows)


def write_segments_csv(segments, path: str) -> str:
    rows = [(s.r_lo, s.r_hi, s.slope, s.intercept, s.max_dev) for s in segments]
    return _write_rows(path, SEGMENT_HEADER, rows)


def emit_csv(result: ScenarioResult, path: str) -> list[str]:
    """One CSV per trace, one segments CSV per G study and one per analytic
    oracle (error 0, flag "analytic"). Returns the written paths."""
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {path}: {exc.strerror}") from exc
    files = []
    for name in sorted(result.traces):
        files.append(write_trace_csv(result.traces[name], os.path.join(path, f"{name}.csv")))
    for name in sorted(result.segments):
        files.append(write_segments_csv(result.segments[name],
                                        os.path.join(path, f"{name}_segments.csv")))
    for name in sorted(result.oracle):
        o = result.oracle[name]
        rows = [(x, v, 0.0, "analytic") for x, v in zip(o["x"], o["oracle"])]
        files.append(_write_rows(os.path.join(path, f"{name}_oracle.csv"), TRACE_HEADER, rows))
    return files


def read_csv(path: str) -> tuple[list[str], list[list]]:
    """Parse an emitted CSV back (numbers as floats, other cells as text)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))

    def conv(c):
        try:
            return float(c)
        except ValueError:
            return c
    return rows[0], [[conv(c) for c in r] for r in rows[1:]]


def _json_ready(v):
    if isinstance(v, dict):
        return {str(k): _json_ready(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_ready(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_json_ready(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def result_summary(result: ScenarioResult) -> dict:
    return _json_ready({
        "scenario": result.scenario, "status": result.status, "backend": BACKEND,
        "wall_clock_s": result.wall_clock,
        "checks": [{"name": c.name, "passed": c.passed, "expected": c.expected,
                    "detail": c.detail} for c in result.checks],
        "flags": result.flags, "reports": result.reports,
        "oracle": {k: {"max_rel_dev": v["max_rel_dev"], "tol": v["tol"], "error": "analytic"}
                   for k, v in result.oracle.items()},
        "splitting": result.splitting,
        "traces": {k: {"axis": t.axis, "quantity": t.quantity, "points": len(t),
                       "meta": t.meta} for k, t in result.traces.items()},
        "config": result.config,
    })


def emit_json(result: ScenarioResult, path: str) -> str:
    text = json.dumps(result_summary(result), indent=2, sort_keys=True) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return path


# ---------------------------------------------------------------------------
# oracle tables for the CLI


def oracle_table(cfg: ScenarioConfig) -> dict:
    """label -> (x, values) of every analytic oracle the scenario defines."""
    gain = cfg.gain()
    out = {}
    name = cfg.scenario
    if name == "sublevel-geometry":
        t = cfg.number("area.t_step") * np.arange(cfg.t_points)
        for c in cfg.complexes("area.disc_centers"):
            out[f"s_disc_{abs(c):g}"] = (t, oracles.disc_s(c, t))
        return out
    if not gain.is_unit:
        return out
    t = make_t_grid(gain, cfg.t_points, cfg.t_max(), cfg.values["grid.spacing"])
    if name == "radial-partial-linearity":
        w = _weights_for(cfg)
        out["profile"] = (t, oracles.radial_profile(_profile(cfg), t, w[0].form_factor))
        if len(w) > 1:
            out["refined"] = (t, oracles.radial_profile(_refined_profile(cfg), t,
                                                        w[1].form_factor))
    elif name == "char-two-segment":
        w = _weights_for(cfg)[0]
        if w.domain.is_centered_disc and w.object_kind == "form":
            out["char"] = (t, oracles.char_two_segment(w.a, t))
    elif name == "closed-form-jets":
        out["jets"] = (t, oracles.closed_form_jets(cfg.number("weight.k", int),
                                                   cfg.complexes("weight.jets"), t))
    elif name == "bergman-logconvex":
        dom = cfg.annulus()
        out["disc"] = (t, oracles.disc_power_green(0, t))
        out["annulus"] = (t[:1], np.array([oracles.annulus_bergman_min(dom.inner_radius,
                                                                       dom.base_point)]))
    elif name == "annulus-kscan":
        dom = cfg.annulus()
        out["k00"] = (np.zeros(1), np.array([oracles.annulus_bergman_min(dom.inner_radius,
                                                                         dom.base_point)]))
    return out
