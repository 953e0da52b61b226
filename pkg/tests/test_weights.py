import math

import numpy as np
import pytest

from pshlab.domain import DomainModel
from pshlab.errors import DomainError, EvaluationError
from pshlab.gain import GainFunction
from pshlab.weights import (RadialProfile, WeightPair, density, eval_phi, eval_psi,
                            jet_order_of, radial_profile_convex, validate_weight)

UNIT = GainFunction.constant()


def test_profile_values_integrate_back_from_zero():
    p = RadialProfile((-1.0,), (2.0, 3.0))
    assert p.values == (-3.0,)
    assert p(-1.0) == pytest.approx(-3.0)
    assert p(-2.0) == pytest.approx(-5.0)
    assert p(-0.5) == pytest.approx(-1.5)


def test_profile_inverse():
    p = RadialProfile((-2.0, -1.0), (1.0, 2.0, 4.0))
    x = np.linspace(-6, -1e-3, 200)
    assert np.allclose(p.inverse(p(x)), x, atol=1e-12)


@pytest.mark.parametrize("bp,sl", [((-1.0,), (3.0, 2.0)), ((0.5,), (1.0, 2.0)),
                                   ((-1.0,), (2.0,)), ((), (0.0,))])
def test_profile_invariants(bp, sl):
    with pytest.raises(DomainError):
        RadialProfile(bp, sl)


def test_profile_anchor_consistency():
    RadialProfile((-1.0,), (2.0, 3.0), anchor=-3.0)
    with pytest.raises(DomainError):
        RadialProfile((-1.0,), (2.0, 3.0), anchor=-2.0)


def test_convex_refinement_is_convex_and_close():
    fn = lambda x: 3 * x + 0.5 * x * x
    p = RadialProfile.from_convex_function(fn, lambda x: 3 + x, -1.0, 8)
    assert len(p.slopes) == 9
    assert np.all(np.diff(p.slopes) >= 0)
    x = np.linspace(-1, 0, 50)
    assert np.max(np.abs(p(x) - fn(x))) < 0.5 / 64


def test_char_construction_profiles():
    w = WeightPair.char_construction(-0.5)
    z = np.array([0.1, 0.5, 0.9])
    g = np.log(np.abs(z))
    assert np.allclose(eval_psi(w, z), g + np.maximum(g, -0.5))
    assert np.allclose(eval_phi(w, z), np.minimum(g, -0.5))
    # sublevel sets of psi are Green sublevel sets
    for t in [0.2, 0.9, 1.0, 2.5]:
        tau = w.green_level(t)
        assert float(w.psi_of_green(-tau)) == pytest.approx(-t)


@pytest.mark.parametrize("w", [
    WeightPair.radial_example(RadialProfile((-1.0,), (2.0, 3.0))),
    WeightPair.power_green(2, DomainModel.annulus(0.2, 0.45)),
    WeightPair.plain_power(1, [1, 1]),
], ids=["radial", "power-green", "plain-power"])
def test_green_level_inverts_psi(w):
    for t in [0.1, 1.0, 3.0, 7.5]:
        tau = w.green_level(t)
        assert w.level_of_green(tau) == pytest.approx(t, rel=1e-12)


def test_jet_order_and_targets():
    assert jet_order_of(WeightPair.plain_power(3, [1, 0, 1, 0])) == 4
    w = WeightPair.power_green(2, DomainModel.disc())
    assert w.jet_target == (1, 0, 0)
    with pytest.raises(DomainError):
        WeightPair.plain_power(1, [1])
    with pytest.raises(DomainError):
        WeightPair.plain_power(1, [0, 0])
    with pytest.raises(DomainError):
        WeightPair.radial_example(RadialProfile((), (2.0,))).__class__(
            "radial-example", DomainModel.disc(0.3), profile=RadialProfile((), (2.0,)))


def test_density_rejects_pole_and_outside():
    w = WeightPair.char_construction(-0.5)
    with pytest.raises(EvaluationError):
        density(WeightPair.power_green(0, DomainModel.disc()), GainFunction.exponential(0.5),
                np.array([0.5, 0.0]) + 0j)
    with pytest.raises(DomainError):
        density(w, UNIT, 1.5)


@pytest.mark.parametrize("w", [
    WeightPair.char_construction(-0.5),
    WeightPair.radial_example(RadialProfile((-1.0,), (2.0, 3.0))),
    WeightPair.power_green(0, DomainModel.annulus(0.2, 0.45)),
], ids=["char", "radial", "annulus"])
def test_validate_weight_accepts_constructions(w):
    rep = validate_weight(w, UNIT)
    assert rep.passed, rep.failures
    assert rep.min_density_on_rings > 0


def test_validate_weight_rejects_nonintegrable_pole():
    w = WeightPair.char_construction(-0.5)
    rep = validate_weight(w, GainFunction.exponential(0.99))
    assert rep.passed
    w2 = WeightPair.power_green(0, DomainModel.disc())
    rep2 = validate_weight(w2, GainFunction.exponential(0.9))
    assert rep2.passed
    # 2(k+1) tilt >= 2 makes the density non-integrable at the pole
    w3 = WeightPair.power_green(1, DomainModel.disc())
    rep3 = validate_weight(w3, GainFunction.exponential(0.6))
    assert not rep3.passed
    assert any("not integrable" in f for f in rep3.failures)


def test_radial_profiles_subharmonic():
    assert radial_profile_convex(WeightPair.char_construction(-0.5))
    assert radial_profile_convex(WeightPair.radial_example(RadialProfile((-1.0,), (2.0, 3.0))))
