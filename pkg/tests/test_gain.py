import math

import numpy as np
import pytest
from scipy import integrate

from pshlab.errors import DomainError, RangeError
from pshlab.gain import GainFunction, eval_c, h_inverse, h_value, validate_gain

GAINS = [
    GainFunction.constant(),
    GainFunction.constant(2.5),
    GainFunction.piecewise([1.0, 0.5, 0.25], [0.7, 2.0]),
    GainFunction.exponential(0.4, 1.5),
]


@pytest.mark.parametrize("gain", GAINS, ids=lambda g: g.kind)
def test_h_matches_numerical_integral(gain):
    for t in [0.0, 0.3, 0.7, 1.9, 2.0, 5.0]:
        pts = [b for b in gain.breakpoints if b > t]
        num, _ = integrate.quad(lambda s: eval_c(gain, s) * math.exp(-s), t, 60.0,
                                points=pts or None, limit=200, epsabs=1e-14)
        assert h_value(gain, t) == pytest.approx(num, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("gain", GAINS, ids=lambda g: g.kind)
def test_h_inverse_round_trip(gain):
    for t in [0.0, 0.01, 0.69, 0.7, 1.3, 4.0, 12.0]:
        r = h_value(gain, t)
        assert h_inverse(gain, r) == pytest.approx(t, abs=1e-9)


def test_h_is_strictly_decreasing():
    t = np.linspace(0, 10, 500)
    for gain in GAINS:
        assert np.all(np.diff(h_value(gain, t)) < 0)


def test_piecewise_is_right_continuous():
    g = GainFunction.piecewise([1.0, 0.5], [1.0])
    assert eval_c(g, 1.0) == 0.5
    assert eval_c(g, 1.0 - 1e-12) == 1.0


def test_negative_t_rejected():
    with pytest.raises(DomainError):
        eval_c(GainFunction.constant(), -0.1)
    with pytest.raises(DomainError):
        h_value(GainFunction.constant(), [0.0, -1.0])


def test_h_inverse_range():
    g = GainFunction.constant(2.0)
    with pytest.raises(RangeError):
        h_inverse(g, 2.5)
    with pytest.raises(RangeError):
        h_inverse(g, 0.0)


@pytest.mark.parametrize("kwargs", [
    dict(kind="piecewise-constant", values=(1.0,), breakpoints=(1.0,)),
    dict(kind="piecewise-constant", values=(1.0, 1.0, 1.0), breakpoints=(2.0, 1.0)),
    dict(kind="constant", values=(-1.0,)),
    dict(kind="constant", values=(1.0, 2.0)),
    dict(kind="quadratic"),
])
def test_malformed_gain_rejected(kwargs):
    with pytest.raises(DomainError):
        GainFunction(**kwargs)


def test_validate_accepts_admissible_gains():
    for gain in GAINS:
        assert validate_gain(gain).passed


def test_validate_rejects_growth():
    rep = validate_gain(GainFunction.exponential(1.5))
    assert not rep.passed
    assert any("increases" in f for f in rep.failures)
    jump = validate_gain(GainFunction.piecewise([1.0, 4.0], [1.0]))
    assert not jump.passed
    assert any("jumps up" in f for f in jump.failures)


def test_infinite_h_rejected():
    with pytest.raises(DomainError):
        h_value(GainFunction.exponential(1.0), 1.0)
