import math

import numpy as np
import pytest

from pshlab import oracles
from pshlab.bergman import (FLAG_BASIS, ArnoldiBasis, BasisSpec, GramSystem, MonomialBasis,
                            assemble_gram, bergman_kernel_value, extremal_trace,
                            minimal_integral, solve_constrained_min)
from pshlab.domain import DomainModel
from pshlab.errors import DomainError, PreconditionError, SolverError
from pshlab.gain import GainFunction
from pshlab.quadrature import QuadratureSpec, arc_gauss_nodes
from pshlab.domain import RegionSpec
from pshlab.weights import WeightPair

UNIT = GainFunction.constant()
RADIAL = QuadratureSpec("adaptive-1d")
ANNULUS = DomainModel.annulus(0.2, 0.45)


def _pinv_oracle(A, C, d):
    """min x*Ax s.t. Cx = d through the pseudo-inverse in the A-metric."""
    L = np.linalg.cholesky(A)
    Linv = np.linalg.inv(L)
    y = np.linalg.pinv(C @ Linv.conj().T) @ d
    x = Linv.conj().T @ y
    return x, float(np.real(np.conj(x) @ A @ x))


def _random_system(rng, n, nu):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = M @ M.conj().T + 0.5 * np.eye(n)
    C = rng.normal(size=(nu, n)) + 1j * rng.normal(size=(nu, n))
    d = rng.normal(size=nu) + 1j * rng.normal(size=nu)
    return A, C, d


def test_gram_plain_power_disc():
    w = WeightPair.plain_power(0, [1])
    sys = assemble_gram(w, UNIT, BasisSpec(0, 8), 0.0, RADIAL)
    n = np.arange(9)
    assert np.allclose(np.diag(sys.A).real, math.pi / (n + 1), rtol=1e-12)
    assert np.allclose(sys.A - np.diag(np.diag(sys.A)), 0)
    assert np.allclose(sys.C, np.eye(1, 9)) and np.allclose(sys.d, [1])


def test_gram_plain_power_shrunk_disc():
    w = WeightPair.plain_power(1, [1, 1])
    sys = assemble_gram(w, UNIT, BasisSpec(0, 8), 2.0, RADIAL)
    n = np.arange(9)
    R = math.exp(-0.5)
    assert np.allclose(np.diag(sys.A).real, math.pi * R ** (2 * n + 2) / (n + 1), rtol=1e-12)
    assert np.allclose(sys.C[:, :3], [[1, 0, 0], [0, 1, 0]])


def test_gram_char_kink_entry():
    a = -0.5
    w = WeightPair.char_construction(a)
    sys = assemble_gram(w, UNIT, BasisSpec(0, 16), 0.2, RADIAL)
    exact = 2 * math.pi * math.exp(a) + 2 * math.pi * math.exp(-a) * math.exp(-0.2)
    assert sys.A[0, 0].real == pytest.approx(exact, rel=1e-8)


def test_solver_trivial_system():
    n = np.arange(9)
    A = np.diag(math.pi / (n + 1)).astype(complex)
    sys = GramSystem(A, np.eye(1, 9, dtype=complex), np.array([1.0 + 0j]), 0.0,
                     MonomialBasis(range(9)))
    res = solve_constrained_min(sys)
    assert np.allclose(res.x, np.eye(1, 9)[0], atol=1e-14)
    assert res.G == pytest.approx(math.pi, rel=1e-14)


def test_solver_matches_pinv_oracle():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 17))
        nu = int(rng.integers(1, min(4, n) + 1))
        A, C, d = _random_system(rng, n, nu)
        res = solve_constrained_min(GramSystem(A, C, d, 0.0, MonomialBasis(range(n))))
        x, G = _pinv_oracle(A, C, d)
        assert res.G == pytest.approx(G, rel=1e-8)
        assert np.allclose(res.x, x, rtol=1e-8, atol=1e-8 * np.linalg.norm(x))
        assert res.flags == []


def test_pythagoras_identity():
    rng = np.random.default_rng(8)
    A, C, d = _random_system(rng, 12, 3)
    res = solve_constrained_min(GramSystem(A, C, d, 0.0, MonomialBasis(range(12))))
    _, _, vh = np.linalg.svd(C)
    null = vh[3:].conj().T
    for _ in range(20):
        delta = null @ (rng.normal(size=9) + 1j * rng.normal(size=9))
        lhs = float(np.real(np.conj(res.x + delta) @ A @ (res.x + delta)))
        rhs = res.G + float(np.real(np.conj(delta) @ A @ delta))
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_solver_rejects_degenerate_input():
    A = np.ones((3, 3), dtype=complex)
    with pytest.raises(SolverError):
        solve_constrained_min(GramSystem(A, np.eye(1, 3, dtype=complex),
                                         np.ones(1, complex), 0.0, None))
    with pytest.raises(SolverError):
        solve_constrained_min(GramSystem(np.eye(3, dtype=complex), np.zeros((1, 3), complex),
                                         np.ones(1, complex), 0.0, None))


def test_bergman_kernel_disc_center():
    w = WeightPair.power_green(0, DomainModel.disc())
    assert bergman_kernel_value(w, UNIT, 0.0) == pytest.approx(1 / math.pi, rel=1e-12)
    # the region {2G < -t} is the disc of radius e^{-t/2}
    assert bergman_kernel_value(w, UNIT, 1.0) == pytest.approx(math.e / math.pi, rel=1e-12)
    with pytest.raises(PreconditionError):
        bergman_kernel_value(WeightPair.power_green(1, DomainModel.disc()), UNIT, 0.0)
    with pytest.raises(PreconditionError):
        bergman_kernel_value(w, GainFunction.constant(2.0), 0.0)


def test_bergman_kernel_annulus_oracle():
    w = WeightPair.power_green(0, ANNULUS)
    val = bergman_kernel_value(w, UNIT, 0.0)
    assert 1 / val == pytest.approx(oracles.annulus_bergman_min(0.2, 0.45), rel=1e-9)


@pytest.mark.parametrize("dom", [DomainModel.disc(0.4), ANNULUS], ids=["disc", "annulus"])
def test_simply_connected_regions_match_conformal_formula(dom):
    w = WeightPair.power_green(0, dom)
    basis = BasisSpec(-24, 24) if dom.is_annulus else BasisSpec(0, 24)
    for t in [0.5, 2.0, 5.0]:
        if dom.is_annulus and t <= -2 * dom.saddle[1]:
            continue
        G, res = minimal_integral(w, UNIT, basis, t, QuadratureSpec("arc-gauss-2d"))
        exact = float(oracles.simply_connected_min(dom.conformal_radius, t))
        assert G == pytest.approx(exact, rel=1e-6)
        assert abs(G - exact) <= max(10 * res.error, 1e-12 * exact)


def test_arnoldi_basis_orthonormal_on_samples():
    nodes = arc_gauss_nodes(RegionSpec(ANNULUS, 1.0, 0.0), 48, 64)
    b = ArnoldiBasis(BasisSpec(-12, 12), nodes.z, nodes.w)
    V = b.values(nodes.z)
    assert np.allclose(V, b.sample_values, atol=1e-9)
    gram = np.conj(V).T @ (nodes.w[:, None] * V)
    assert np.allclose(gram, np.eye(b.size), atol=1e-10)
    assert sorted(b.powers) == list(range(-12, 13))


def test_arnoldi_jets_match_finite_differences():
    nodes = arc_gauss_nodes(RegionSpec(ANNULUS, 1.0, 0.0), 32, 48)
    b = ArnoldiBasis(BasisSpec(-6, 6), nodes.z, nodes.w)
    J = b.jets(0.45, 3)
    h = 1e-4
    f = lambda z: b.values(np.array([z]))[0]
    assert np.allclose(J[0], f(0.45), atol=1e-12)
    assert np.allclose(J[1], (f(0.45 + h) - f(0.45 - h)) / (2 * h), atol=1e-6)
    # second Taylor coefficient f''/2
    assert np.allclose(J[2], (f(0.45 + h) - 2 * f(0.45) + f(0.45 - h)) / (2 * h * h), atol=1e-4)


def test_basis_instability_flag_and_escalation():
    w = WeightPair.power_green(6, ANNULUS)
    quad = QuadratureSpec("arc-gauss-2d")
    _, res = minimal_integral(w, UNIT, BasisSpec(-8, 8), 0.0, quad)
    assert FLAG_BASIS in res.flags
    assert res.basis_change > 1e-6 * res.G
    et = extremal_trace(w, UNIT, BasisSpec(-8, 8), [0.0, 0.5], quad, escalate_to=40)
    assert all(f == "ok" for f in et.trace.flags)
    used = et.trace.meta["basis_used"]
    assert used[0][1] > 8 and used[1][1] >= used[0][1]


def test_basis_spec_rules():
    with pytest.raises(DomainError):
        BasisSpec(1, 4)
    with pytest.raises(DomainError):
        BasisSpec(-300, 300)
    assert BasisSpec(-4, 4).extended() == BasisSpec(-12, 12)
    assert BasisSpec(0, 4).extended() == BasisSpec(0, 12)
    w = WeightPair.power_green(0, DomainModel.disc(0.3))
    with pytest.raises(PreconditionError):
        assemble_gram(w, UNIT, BasisSpec(-2, 2), 0.0, QuadratureSpec("arc-gauss-2d"))


def test_extremal_trace_decreasing_on_disc():
    w = WeightPair.plain_power(1, [1, 1])
    et = extremal_trace(w, UNIT, None, np.linspace(0, 6, 12))
    assert np.all(np.diff(et.trace.values) < 0)
    assert np.allclose(et.trace.values, oracles.closed_form_jets(1, [1, 1], et.trace.x),
                       rtol=1e-10)
    with pytest.raises(DomainError):
        extremal_trace(w, UNIT, None, [1.0, 0.5])
