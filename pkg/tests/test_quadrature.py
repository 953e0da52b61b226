import math

import numpy as np
import pytest

from pshlab.domain import DomainModel, RegionSpec
from pshlab.errors import DomainError
from pshlab.quadrature import (FLAG_DEPTH, FLAG_OK, FLAG_TOL, QuadratureSpec, arc_gauss_nodes,
                               polar_grid_nodes, radial_integral, radial_integral_vec,
                               region_integral, worst_flag)


def _disc_level_set(a, t):
    """Euclidean center and radius of {G < -t} on the unit disc with pole a."""
    s2 = math.exp(-2 * t)
    return a * (1 - s2) / (1 - a * a * s2), math.exp(-t) * (1 - a * a) / (1 - a * a * s2)


def test_radial_integral_endpoint_singularity_and_kink():
    res = radial_integral(lambda r: r ** -0.5, 1.0, tol=1e-12)
    assert res.ok and res.value == pytest.approx(2.0, rel=1e-11)
    res = radial_integral(lambda r: abs(r - 0.3), 1.0, tol=1e-12, breakpoints=[0.3])
    assert res.value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-12)
    res = radial_integral(lambda r: r, 2.0, lower=1.0)
    assert res.value == pytest.approx(1.5)
    with pytest.raises(DomainError):
        radial_integral(lambda r: r, 0.0)


def test_radial_integral_flags_hard_integrands():
    res = radial_integral(lambda r: math.sin(1 / r) / r, 1.0, tol=1e-12, max_depth=2)
    assert res.flag != FLAG_OK


def test_vector_integral_matches_scalar():
    p = 2.0 * np.arange(20) + 1.0
    f = lambda u: u ** p * (1.0 + 0.5 * (u > 0.4)) * u ** -0.6
    vals, err, flag = radial_integral_vec(f, 1.0, tol=1e-13, breakpoints=[0.4])
    assert flag == FLAG_OK
    for i, pi in enumerate(p):
        ref = radial_integral(lambda u: u ** pi * (1.0 + 0.5 * (u > 0.4)) * u ** -0.6, 1.0,
                              tol=1e-13, breakpoints=[0.4]).value
        assert vals[i] == pytest.approx(ref, rel=1e-11, abs=1e-15)


@pytest.mark.parametrize("a,t", [(0.0, 0.0), (0.4, 0.0), (0.4, 0.7), (0.6, 2.0)])
def test_arc_nodes_on_disc_moments(a, t):
    center, R = _disc_level_set(a, t)
    nodes = arc_gauss_nodes(RegionSpec(DomainModel.disc(a), 1.0, t), 32, 48)
    assert nodes.integrate(np.ones(nodes.z.size)) == pytest.approx(math.pi * R * R, rel=1e-10)
    m2 = nodes.integrate(np.abs(nodes.z - a) ** 2)
    exact = math.pi * R ** 4 / 2 + math.pi * R * R * (center - a) ** 2
    assert m2 == pytest.approx(exact, rel=1e-10)


def test_arc_nodes_on_annulus():
    dom = DomainModel.annulus(0.2, 0.45)
    full = arc_gauss_nodes(RegionSpec(dom, 1.0, 0.0), 48, 64)
    assert full.integrate(np.ones(full.z.size)) == pytest.approx(math.pi * 0.96, rel=1e-10)
    assert np.all(dom.contains(full.z))
    # a density jumping at a deeper level is integrated exactly once the level is passed
    tau1, tau2 = 0.3, 1.1
    inner = arc_gauss_nodes(RegionSpec(dom, 1.0, tau2), 48, 64)
    banded = arc_gauss_nodes(RegionSpec(dom, 1.0, tau1), 48, 64, levels=[tau2])
    jump = banded.integrate((banded.green < -tau2).astype(float))
    assert jump == pytest.approx(inner.integrate(np.ones(inner.z.size)), rel=1e-9)


def test_arc_and_polar_agree_within_estimate():
    dom = DomainModel.annulus(0.2, 0.45)
    reg = RegionSpec(dom, 1.0, 0.005)
    dens = lambda z: np.abs(z) ** 2
    arc = region_integral(dens, reg, QuadratureSpec("arc-gauss-2d"))
    grid = region_integral(dens, reg, QuadratureSpec("polar-grid-2d", 512, 512))
    assert arc.error < 1e-9 * arc.value
    assert abs(arc.value - grid.value) <= 3 * grid.error + 1e-12
    pg = polar_grid_nodes(reg, 64, 64)
    assert np.all(pg.green < -0.005)


def test_spec_derivations():
    s = QuadratureSpec("arc-gauss-2d", 48, 64)
    assert (s.coarse().n_r, s.coarse().n_theta) == (36, 48)
    assert (s.for_degree(32).n_r, s.for_degree(32).n_theta) == (64, 96)
    g = QuadratureSpec("polar-grid-2d", 1024, 1024)
    assert (g.coarse().n_r, g.for_degree(40).n_r) == (512, 1024)
    for bad in [dict(n_r=8), dict(tol=0.5), dict(method="simpson"), dict(max_depth=0)]:
        with pytest.raises(DomainError):
            QuadratureSpec(**bad)
    with pytest.raises(DomainError):
        region_integral(lambda z: z, RegionSpec(DomainModel.disc()), QuadratureSpec("adaptive-1d"))


def test_worst_flag_order():
    assert worst_flag([]) == FLAG_OK
    assert worst_flag([FLAG_OK, FLAG_TOL]) == FLAG_TOL
    assert worst_flag([FLAG_DEPTH, FLAG_TOL]) == FLAG_DEPTH
