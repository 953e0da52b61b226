import json
import math

import numpy as np
import pytest
from scipy import integrate

from pshlab import oracles
from pshlab.bergman import minimal_integral, BasisSpec
from pshlab.diagnostics import (Probe, Trace, classify, default_tolerance,
                                lemma_concave_predicate, lemma_notconvex_predicate,
                                measure_splitting_check, report_to_json, reparametrize,
                                second_differences, splitting_slope)
from pshlab.errors import PreconditionError
from pshlab.gain import GainFunction
from pshlab.quadrature import QuadratureSpec
from pshlab.weights import WeightPair

UNIT = GainFunction.constant()


def _trace(x, y, err=0.0, axis="r-axis"):
    x = np.asarray(x, float)
    return Trace(x, np.asarray(y, float), np.full(x.size, err), axis)


def test_second_differences_nonuniform_exact_on_quadratics():
    x = np.sort(np.random.default_rng(0).uniform(0, 1, 30))
    tr = _trace(x, 3 * x * x + x + 1)
    _, d = second_differences(tr)
    assert np.allclose(d * tr.scale, 6.0, rtol=1e-8)
    _, d = second_differences(_trace(np.linspace(0, 1, 10), 2 * np.linspace(0, 1, 10)))
    assert np.allclose(d, 0.0, atol=1e-12)


def test_classify_linear_and_kinked():
    x = np.linspace(0.01, 1, 60)
    lin = classify(_trace(x, 2 * x + 1), 1e-6)
    assert lin.verdict == "linear" and len(lin.segments) == 1
    assert lin.segments[0].slope == pytest.approx(2.0)
    y = np.minimum(4 * x, 2 * x + 0.7)
    rep = classify(_trace(x, y), 1e-6)
    assert rep.concave and not rep.convex
    assert [round(s.slope, 9) for s in rep.segments] == [4.0, 2.0]
    assert len(rep.kinks) == 1 and rep.kinks[0].x == pytest.approx(0.35)


def test_classify_refuses_tolerance_below_noise():
    x = np.linspace(0, 1, 20)
    tr = _trace(x, x, err=1e-3)
    with pytest.raises(PreconditionError):
        classify(tr, 1e-6)
    assert classify(tr, default_tolerance(tr)).verdict == "linear"


def test_trace_validation():
    with pytest.raises(PreconditionError):
        _trace([0, 0, 1], [1, 1, 1])
    with pytest.raises(PreconditionError):
        _trace([0, 1], [1, -1])
    with pytest.raises(PreconditionError):
        Trace(np.arange(3.0), np.ones(3), -np.ones(3))
    with pytest.raises(PreconditionError):
        Trace(np.arange(3.0), np.ones(3), np.ones(3), "s-axis")
    with pytest.raises(PreconditionError):
        classify(_trace([0, 1, 2], [0, 1, 2]), 1e-6)


def test_reparametrize_and_neg_log():
    t = np.linspace(0, 3, 7)
    tr = Trace(t, np.exp(-t), 1e-9 * np.ones(7))
    r = reparametrize(tr, UNIT)
    assert r.axis == "r-axis" and np.all(np.diff(r.x) > 0)
    assert np.allclose(r.x, r.values)
    nl = tr.neg_log()
    assert np.allclose(nl.values, t) and np.allclose(nl.errors, 1e-9 / np.exp(-t))
    with pytest.raises(PreconditionError):
        reparametrize(r, UNIT)


def test_concave_predicate_on_bergman_disc():
    t = np.linspace(0, 6, 30)
    rep = lemma_concave_predicate(Trace(t, math.pi * np.exp(-t), np.zeros(30)))
    assert rep.hypotheses_hold and rep.conclusion_concave
    with pytest.raises(PreconditionError):
        lemma_concave_predicate(Trace(t, np.ones(30), np.zeros(30)))


def test_notconvex_predicate_on_two_segment_oracle():
    a = -0.5
    t = np.linspace(0, 8, 200)
    r = np.exp(-t)[::-1]
    g = oracles.char_two_segment(a, -np.log(r))
    tr = _trace(r, g)
    s_out = oracles.char_slopes(a)[1]
    r0 = math.exp(2 * a)
    b = float(oracles.char_two_segment(a, 0.0)) - s_out
    rep = lemma_notconvex_predicate(tr, (r0, 1.0), s_out, b, 1e-6)
    assert rep.predicted and rep.confirmed
    assert rep.worst_negative < -1e-4
    with pytest.raises(PreconditionError):
        lemma_notconvex_predicate(tr, (r0, 1.0), s_out * 1.1, b, 1e-6)


@pytest.mark.parametrize("probe", [Probe("indicator", 0.2, 0.9),
                                   Probe("exp-window", 0.1, 0.8, beta=1.5, amplitude=2.0)])
def test_probe_moment(probe):
    num, _ = integrate.quad(lambda t: float(probe(t)) * math.exp(-t), 0, 2,
                            points=[probe.t1, probe.t2], epsabs=1e-15)
    assert probe.exp_moment() == pytest.approx(num, rel=1e-10)


def test_probe_validation():
    with pytest.raises(PreconditionError):
        Probe("gaussian", 0, 1)
    with pytest.raises(PreconditionError):
        Probe("indicator", 1, 1)


def test_measure_splitting_on_char_outer_segment():
    a = -0.5
    w = WeightPair.char_construction(a)
    T1, T2 = 0.0, -2 * a
    _, res = minimal_integral(w, UNIT, BasisSpec(0, 16), T2, QuadratureSpec("adaptive-1d"))
    G1, G2 = (float(oracles.char_two_segment(a, x)) for x in (T1, T2))
    kappa = splitting_slope(G1, G2, UNIT, T1, T2)
    assert kappa == pytest.approx(oracles.char_slopes(a)[1], rel=1e-12)
    for probe in [Probe("indicator", 0.0, 0.4), Probe("indicator", 0.4, 1.0),
                  Probe("exp-window", 0.1, 0.9, beta=2.0)]:
        rep = measure_splitting_check(w, UNIT, res, (T1, T2), kappa, probe)
        assert rep.passed and rep.residual < 1e-8
    with pytest.raises(PreconditionError):
        measure_splitting_check(w, UNIT, res, (T1, T2), kappa, Probe("indicator", 0.5, 1.5))
    with pytest.raises(PreconditionError):
        measure_splitting_check(w, UNIT, res, (T1, T2), kappa, Probe("indicator", 0, 1),
                                drift=1e-3)


def test_report_json_round_trip():
    x = np.linspace(0.01, 1, 20)
    rep = classify(_trace(x, np.minimum(4 * x, 2 * x + 0.7)), 1e-6)
    d = json.loads(json.dumps(report_to_json(rep)))
    assert d["verdict"] == "concave" and len(d["segments"]) == 2
