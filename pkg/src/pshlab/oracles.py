"""Closed-form values used as baselines for the scenarios.

Each formula follows from integrating a radial density over a disc or from
the Laurent orthonormal basis of the annulus; the test suite checks them
against independent quadrature before anything relies on them.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .weights import RadialProfile


def closed_form_jets(k: int, jets, t):
    """Plain power weight 2(k+1) log|z| with f^{(j)}(0) = j! a_j, j <= k:
    G(t) = sum_j |a_j|^2 pi / (j + 1) e^{-(j+1) t / (k+1)}."""
    jets = [complex(a) for a in jets]
    if len(jets) != k + 1:
        raise DomainError(f"expected {k + 1} jet coefficients, got {len(jets)}")
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for j, a in enumerate(jets):
        out = out + abs(a) ** 2 * math.pi / (j + 1) * np.exp(-(j + 1) * t / (k + 1))
    return out


def char_two_segment(a: float, t):
    """Two-segment construction on the unit disc, c = 1, F = dz:
    2 pi e^a + 2 pi e^{-a} e^{-t} for t <= -2a, 4 pi e^{-a} e^{-t} beyond."""
    if not a < 0:
        raise DomainError("a must be negative")
    t = np.asarray(t, dtype=float)
    near = 2 * math.pi * math.exp(a) + 2 * math.pi * math.exp(-a) * np.exp(-t)
    far = 4 * math.pi * math.exp(-a) * np.exp(-t)
    return np.where(t <= -2 * a, near, far)


def char_slopes(a: float) -> tuple[float, float]:
    """Slopes of G in r = e^{-t}: (inner segment r < e^{2a}, outer segment)."""
    return 4 * math.pi * math.exp(-a), 2 * math.pi * math.exp(-a)


def radial_profile(profile: RadialProfile, t, form_factor: float = 2.0, c0: float = 1.0):
    """psi = g(log|z|), phi = 2 log|z| - g(log|z|), constant gain c0, F = 1:
    G(t) = 2 pi form_factor c0 int_{-inf}^{g^{-1}(-t)} e^{g(x)} dx,
    evaluated piece by piece."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    edges = list(profile.breakpoints) + [0.0]
    vals = list(profile.values) + [0.0]
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        x_end = profile.inverse(-ti) if ti > 0 else 0.0
        total = 0.0
        lo_val = 0.0  # e^{g} at -inf
        for j, s in enumerate(profile.slopes):
            hi = edges[j]
            if x_end <= hi:
                total += (math.exp(float(profile(x_end))) - lo_val) / s
                break
            total += (math.exp(vals[j]) - lo_val) / s
            lo_val = math.exp(vals[j])
        out[i] = 2 * math.pi * form_factor * c0 * total
    return out


def radial_kinks(profile: RadialProfile) -> list[float]:
    """r-positions of the kinks of G(r): r = e^{g(x_i)}."""
    return [math.exp(v) for v in profile.values]


def disc_power_green(k: int, t):
    """Centered disc, psi = 2(k+1) G, constraint f(0) = 1 and vanishing
    derivatives up to order k: the minimizer is 1, G = pi e^{-t/(k+1)}."""
    t = np.asarray(t, dtype=float)
    return math.pi * np.exp(-t / (k + 1))


def disc_s(z0: complex, t):
    """s(t) = e^{2t} area{G < -t} on the unit disc with pole z0.

    The sublevel set is the preimage of |w| < e^{-t} under a disc
    automorphism, a Euclidean disc of radius e^{-t}(1-|z0|^2)/(1-|z0|^2 e^{-2t}).
    """
    t = np.asarray(t, dtype=float)
    a2 = abs(complex(z0)) ** 2
    return math.pi * (1 - a2) ** 2 / (1 - a2 * np.exp(-2 * t)) ** 2


def annulus_bergman_min(rho: float, z0: complex, terms: int = 4000) -> float:
    """Minimal integral of |f|^2 over {rho < |z| < 1} with f(z0) = 1, i.e.
    1 / K(z0, z0) for the unweighted Bergman kernel, from the orthogonal
    Laurent basis: ||z^n||^2 = pi (1 - rho^(2n+2)) / (n+1), n != -1, and
    2 pi log(1/rho) for n = -1."""
    r = abs(complex(z0))
    if not rho < r < 1:
        raise DomainError("z0 must lie inside the annulus")
    lr, lrho = math.log(r), math.log(rho)
    total = 1.0 / (2 * math.pi * -lrho) * r ** -2
    for n in range(0, terms):
        # n >= 0
        total += (n + 1) * math.exp(2 * n * lr) / (math.pi * -math.expm1((2 * n + 2) * lrho))
        # m = -(n + 2) <= -2: (m+1) / (pi (1 - rho^(2m+2))) |z|^(2m)
        m1 = -(n + 1)
        e = (2 * n + 2) * lrho
        # rho^(2m+2) = rho^(-2n-2) is huge; rewrite the term to stay finite
        term = -m1 * math.exp(-2 * (n + 2) * lr + e) / (math.pi * -math.expm1(e))
        total += term
        if n > 10 and term < 1e-18 * total and (n + 1) * r ** (2 * n) < 1e-18 * total:
            break
    return 1.0 / total


def simply_connected_min(conformal_radius: float, t):
    """Unweighted minimal integral of |f|^2 over {2G < -t} with f(z0) = 1,
    valid once that region is simply connected. The Riemann map onto the
    disc of radius e^{-t/2} has derivative e^{-t/2} / conformal_radius at z0,
    so the value is pi e^{-t} conformal_radius^2."""
    t = np.asarray(t, dtype=float)
    return math.pi * np.exp(-t) * conformal_radius ** 2
