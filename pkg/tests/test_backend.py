import os
import subprocess
import sys

import numpy as np
import pytest

from pshlab import _backend, _pykernels

ck = pytest.importorskip("pshlab._ckernels")


def _points(n=4000, seed=0):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0.05, 1.0, n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def test_compiled_backend_selected_by_default():
    if os.environ.get("PSHLAB_PURE_PYTHON") == "1":
        pytest.skip("pure Python forced for this run")
    assert _backend.BACKEND == "compiled"


def test_environment_forces_fallback():
    env = dict(os.environ, PSHLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import pshlab; print(pshlab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("z0", [0j, 0.4 + 0.1j, -0.7j])
def test_green_disc_agrees(z0):
    z = _points()
    assert np.allclose(ck.green_disc(z, z0), _pykernels.green_disc(z, z0), atol=1e-13)


@pytest.mark.parametrize("rho,z0", [(0.2, 0.45), (0.5, -0.6 + 0.2j)])
def test_green_annulus_agrees(rho, z0):
    z = _points()
    z = z[np.abs(z) > rho]
    a = ck.green_annulus(z, z0, rho, 16)
    b = _pykernels.green_annulus(z, z0, rho, 16)
    assert np.allclose(a, b, atol=1e-12)
    grid = z[:100].reshape(10, 10)
    assert ck.green_annulus(grid, z0, rho, 16).shape == (10, 10)


def test_edge_fraction_agrees():
    r = np.linspace(0.2, 1.0, 65)
    th = np.linspace(0, 2 * np.pi, 48, endpoint=False)
    f = _pykernels.green_annulus(r[:, None] * np.exp(1j * th), 0.45, 0.2, 16) + 0.3
    f[0, :] = f[-1, :] = 0.3
    assert ck.edge_fraction_area(f, r) == pytest.approx(_pykernels.edge_fraction_area(f, r),
                                                         rel=1e-13)
