"""Pure numpy implementations of the hot kernels.

Each function here has a compiled twin in ``_ckernels.pyx`` with the same
signature and semantics; ``_backend`` picks one at import time.
"""
from __future__ import annotations

import numpy as np

_CHUNK = 1 << 18


def green_disc(z, z0):
    z = np.asarray(z, dtype=np.complex128)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z - z0)) - np.log(np.abs(1.0 - np.conj(z0) * z))


def green_annulus(z, z0, rho, nterms):
    """Image-charge product for the Green function of {rho < |z| < 1}."""
    z = np.asarray(z, dtype=np.complex128)
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=np.float64)
    z0 = complex(z0)
    rho2 = rho * rho
    b0 = np.log(abs(z0)) / np.log(rho)
    for lo in range(0, flat.size, _CHUNK):
        w = flat[lo:lo + _CHUNK]
        u1 = rho2 * w / z0
        u2 = w * z0.conjugate()
        u3 = rho2 * z0 / w
        u4 = rho2 / (w * z0.conjugate())
        num = np.ones_like(w)
        den = np.ones_like(w)
        q = 1.0
        for _ in range(nterms):
            num *= (1.0 - q * u1) * (1.0 - q * u3)
            den *= (1.0 - q * u2) * (1.0 - q * u4)
            q *= rho2
        with np.errstate(divide="ignore"):
            out[lo:lo + _CHUNK] = (np.log(np.abs(w - z0)) - b0 * np.log(np.abs(w))
                                   + np.log(np.abs(num)) - np.log(np.abs(den)))
    return out.reshape(z.shape)


def edge_fraction_area(f, r_edges):
    """Sum over polar cells of the r-measure of {f < 0}.

    ``f`` holds the level function at radial cell edges, shape
    ``(len(r_edges), n_theta)``; the sign change inside a cell is located by
    linear interpolation. Returns sum of (r_b**2 - r_a**2) / 2 over the covered
    sub-intervals; the caller multiplies by the angular step.
    """
    f = np.maximum(np.asarray(f, dtype=np.float64), -1e300)
    r = np.asarray(r_edges, dtype=np.float64)[:, None]
    f0, f1 = f[:-1], f[1:]
    r0, r1 = r[:-1], r[1:]
    in0, in1 = f0 < 0.0, f1 < 0.0
    full = in0 & in1
    part = in0 ^ in1
    with np.errstate(invalid="ignore", divide="ignore"):
        rs = r0 + (r1 - r0) * (f0 / (f0 - f1))
    acc = np.where(full, 0.5 * (r1 * r1 - r0 * r0), 0.0)
    acc += np.where(part & in0, 0.5 * (rs * rs - r0 * r0), 0.0)
    acc += np.where(part & in1, 0.5 * (r1 * r1 - rs * rs), 0.0)
    return float(acc.sum(axis=0).sum())
