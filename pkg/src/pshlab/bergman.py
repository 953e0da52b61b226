"""Jet-constrained minimum-norm problems in weighted Bergman spaces.

G(t) = min { integral over {psi < -t} of |F|^2 e^{-phi} c(-psi) :
             F holomorphic, Taylor coefficients of F at z0 = jet_target }

is discretized on a finite basis: monomials z^n (radial problems, where the
Gram matrix is diagonal) or Laurent monomials z^n, n_min <= n <= n_max,
orthonormalized by an Arnoldi recurrence on the quadrature sample set. The
recurrence spans the same space as the raw monomials but keeps the Gram
matrix close to the identity, which raw Laurent monomials on small regions
far from 0 cannot do (their scaled condition numbers exceed 1e16).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .domain import RegionSpec
from .errors import AssemblyError, DomainError, PreconditionError, SolverError
from .gain import GainFunction
from .quadrature import (FLAG_OK, QuadratureSpec, arc_gauss_nodes, masking_error,
                         polar_grid_nodes, radial_integral_vec, worst_flag)
from .weights import WeightPair

COND_LIMIT = 1e14
AGREE_TOL = 1e-9
STABILITY_TOL = 1e-6
EXTENSION = 8
FLAG_BASIS = "basis-unstable"
FLAG_SOLVER = "solver-disagreement"
FLAG_QUAD = "quadrature-tolerance"


@dataclass(frozen=True)
class BasisSpec:
    n_min: int = 0
    n_max: int = 16
    center: complex = 0j
    orthogonalize: bool = True

    def __post_init__(self):
        if not self.n_min <= 0 <= self.n_max:
            raise DomainError("basis needs n_min <= 0 <= n_max")
        if self.n_max - self.n_min + 1 > 512:
            raise DomainError("basis larger than 512 functions")

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    def extended(self, extra: int = EXTENSION) -> "BasisSpec":
        return BasisSpec(self.n_min - (extra if self.n_min < 0 else 0), self.n_max + extra,
                         self.center, self.orthogonalize)

    def with_max(self, n_max: int) -> "BasisSpec":
        n_min = -n_max if self.n_min < 0 else 0
        return BasisSpec(n_min, n_max, self.center, self.orthogonalize)


def _gen_binom(n: int, j: int) -> float:
    out = 1.0
    for q in range(j):
        out *= (n - q) / (q + 1)
    return out


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated Cauchy product of Taylor coefficient vectors (first axis)."""
    nu = a.shape[0]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for j in range(nu):
        for i in range(j + 1):
            out[j] += a[i] * b[j - i]
    return out


class MonomialBasis:
    """u_n(z) = ((z - c)/sigma)^n for the listed powers."""

    orthonormal = False

    def __init__(self, powers, center: complex = 0j, scale: float = 1.0):
        self.powers = np.asarray(list(powers), dtype=int)
        self.center = complex(center)
        self.scale = float(scale)

    @property
    def size(self) -> int:
        return self.powers.size

    def values(self, z) -> np.ndarray:
        x = (np.asarray(z, dtype=complex) - self.center) / self.scale
        return x[:, None] ** self.powers[None, :]

    def jets(self, z0: complex, nu: int) -> np.ndarray:
        """C[j][n] = (1/j!) d^j u_n / dz^j at z0 (generalized binomials for
        negative powers)."""
        x0 = (complex(z0) - self.center) / self.scale
        C = np.zeros((nu, self.size), dtype=complex)
        for j in range(nu):
            for i, n in enumerate(self.powers):
                b = _gen_binom(int(n), j)
                if b != 0.0:
                    C[j, i] = b * x0 ** (int(n) - j) / self.scale ** j
        return C

    def leading(self, m: int) -> "MonomialBasis":
        return MonomialBasis(self.powers[:m], self.center, self.scale)


class ArnoldiBasis:
    """Laurent monomials about ``center`` orthonormalized on weighted samples.

    Column 0 is the normalized constant; later columns multiply an earlier
    column by x = (z - c)/sigma_out (positive powers) or y = sigma_in/(z - c)
    (negative powers) and orthogonalize against everything before (two
    Gram-Schmidt passes). Columns are ordered so that the span of the first
    ``lead_size`` columns is exactly the Laurent span of ``lead`` spec; a
    power whose new direction falls below ``rank_tol`` (numerically already
    in the span) ends its sequence.
    """

    orthonormal = True

    def __init__(self, spec: BasisSpec, z: np.ndarray, w: np.ndarray,
                 lead: BasisSpec | None = None, rank_tol: float = 1e-6):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=float)
        self.center = complex(spec.center)
        dz = z - self.center
        self.sigma_out = float(np.max(np.abs(dz)))
        self.sigma_in = float(np.min(np.abs(dz)))
        if spec.n_min < 0 and not self.sigma_in > 0:
            raise AssemblyError("Laurent basis center lies in the sample region")
        x = dz / self.sigma_out
        y = self.sigma_in / dz if spec.n_min < 0 else None
        lead = lead or spec
        order = ([("x", n) for n in range(1, lead.n_max + 1)]
                 + [("y", n) for n in range(1, -lead.n_min + 1)]
                 + [("x", n) for n in range(lead.n_max + 1, spec.n_max + 1)]
                 + [("y", n) for n in range(-lead.n_min + 1, -spec.n_min + 1)])
        m_total = 1 + len(order)
        # column-major so that Q[:, :k] is a contiguous block for BLAS
        Q = np.empty((z.size, m_total), dtype=complex, order="F")
        Q[:, 0] = 1.0 / math.sqrt(w.sum())
        self.steps: list[tuple[str, int, np.ndarray, float]] = []
        self.powers = [0]
        last = {"x": 0, "y": 0}
        dead = set()
        lead_count = 1 + lead.n_max - lead.n_min
        self.lead_size = None
        for idx, (kind, n) in enumerate(order):
            if 1 + idx == lead_count:
                self.lead_size = len(self.powers)
            if kind in dead:
                continue
            k = len(self.powers)
            mult = x if kind == "x" else y
            v = mult * Q[:, last[kind]]
            norm0 = math.sqrt(float(np.dot(w, np.abs(v) ** 2)))
            h = np.zeros(k, dtype=complex)
            for _ in range(2):
                hh = np.conj(np.conj(w * v) @ Q[:, :k])
                v = v - Q[:, :k] @ hh
                h += hh
            eta = math.sqrt(float(np.dot(w, np.abs(v) ** 2)))
            if eta < rank_tol * norm0:
                dead.add(kind)
                continue
            Q[:, k] = v / eta
            self.steps.append((kind, last[kind], h, eta))
            self.powers.append(n if kind == "x" else -n)
            last[kind] = k
        if self.lead_size is None:
            self.lead_size = len(self.powers)
        self.q0 = 1.0 / math.sqrt(w.sum())
        self.sample_values = Q[:, :len(self.powers)]

    @property
    def size(self) -> int:
        return len(self.powers)

    def values(self, z) -> np.ndarray:
        dz = np.asarray(z, dtype=complex) - self.center
        x = dz / self.sigma_out
        y = self.sigma_in / dz if any(k == "y" for k, *_ in self.steps) else None
        Q = np.empty((dz.size, self.size), dtype=complex, order="F")
        Q[:, 0] = self.q0
        for k, (kind, parent, h, eta) in enumerate(self.steps, start=1):
            mult = x if kind == "x" else y
            Q[:, k] = (mult * Q[:, parent] - Q[:, :k] @ h) / eta
        return Q

    def jets(self, z0: complex, nu: int) -> np.ndarray:
        u0 = complex(z0) - self.center
        xj = np.zeros(nu, dtype=complex)
        xj[0] = u0 / self.sigma_out
        if nu > 1:
            xj[1] = 1.0 / self.sigma_out
        yj = None
        if any(k == "y" for k, *_ in self.steps):
            yj = np.array([self.sigma_in * (-1) ** i / u0 ** (i + 1) for i in range(nu)],
                          dtype=complex)
        J = np.zeros((nu, self.size), dtype=complex)
        J[0, 0] = self.q0
        for k, (kind, parent, h, eta) in enumerate(self.steps, start=1):
            mj = xj if kind == "x" else yj
            J[:, k] = (_jet_mul(mj, J[:, parent]) - J[:, :k] @ h) / eta
        return J

    def leading(self, m: int) -> "ArnoldiBasis":
        out = object.__new__(ArnoldiBasis)
        out.__dict__.update(self.__dict__)
        out.steps = self.steps[:m - 1]
        out.powers = self.powers[:m]
        out.lead_size = m
        out.sample_values = self.sample_values[:, :m]
        return out


@dataclass
class GramSystem:
    A: np.ndarray
    C: np.ndarray
    d: np.ndarray
    t: float
    basis: object
    A_coarse: np.ndarray | None = None
    entry_errors: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def min_singular_C(self) -> float:
        return float(np.linalg.svd(self.C, compute_uv=False)[-1])

    def leading(self, m: int) -> "GramSystem":
        return GramSystem(self.A[:m, :m], self.C[:, :m], self.d, self.t,
                          self.basis.leading(m),
                          None if self.A_coarse is None else self.A_coarse[:m, :m],
                          None if self.entry_errors is None else self.entry_errors[:m],
                          dict(self.meta))


@dataclass
class MinimizerResult:
    x: np.ndarray
    G: float
    residual: float
    dual: np.ndarray
    G_schur: float
    flags: list[str]
    t: float = 0.0
    basis: object = None
    quad_error: float = 0.0
    basis_change: float = 0.0
    cond: float = 1.0

    @property
    def error(self) -> float:
        """Propagated error estimate: quadrature plus basis truncation."""
        return self.quad_error + self.basis_change

    @property
    def flag(self) -> str:
        return worst_flag(self.flags) if self.flags else FLAG_OK

    def evaluate(self, z) -> np.ndarray:
        return self.basis.values(np.atleast_1d(z)) @ self.x


# ---------------------------------------------------------------------------
# assembly


def _check_hermitian(A: np.ndarray, t: float) -> np.ndarray:
    scale = float(np.max(np.abs(A)))
    if float(np.max(np.abs(A - A.conj().T))) > 1e-12 * scale:
        raise AssemblyError(f"Gram matrix not Hermitian at t={t}")
    A = 0.5 * (A + A.conj().T)
    if np.any(np.real(np.diag(A)) <= 0):
        raise AssemblyError(f"nonpositive Gram diagonal at t={t}")
    return A


def radial_gram(w: WeightPair, gain: GainFunction, n_max: int, t: float,
                tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Diagonal of the monomial Gram matrix for radial weights on the
    centered disc: 2 pi int_0^R r^{2n+1} D(log r) dr, kinks as breakpoints.

    All powers share one adaptive subdivision in u = r / R, where every
    entry is O(1); the factor R^{2n+2} is applied afterwards.
    """
    if not w.domain.is_centered_disc:
        raise PreconditionError("radial fast path needs the centered disc")
    tau = w.green_level(t)
    R = math.exp(-tau)
    kinks = [math.exp(tau - lv) for lv in w.kink_green_levels(gain) if lv > tau]
    p = 2.0 * np.arange(n_max + 1) + 1.0

    def f(u):
        if u <= 0.0:
            return np.zeros(p.size)
        return u ** p * float(w.density_of_green(gain, math.log(u) - tau))

    vals, err, flag = radial_integral_vec(f, 1.0, tol=tol, breakpoints=kinks)
    scale = 2.0 * math.pi * R ** (p + 1.0)
    return scale * vals, scale * err, [flag] * (n_max + 1)


def region_of(w: WeightPair, t: float) -> RegionSpec:
    return RegionSpec(w.domain, 1.0, w.green_level(t))


def _nodes(region, gain, w, quad: QuadratureSpec):
    levels = w.kink_green_levels(gain)
    if quad.method == "arc-gauss-2d":
        return arc_gauss_nodes(region, quad.n_r, quad.n_theta, levels)
    if quad.method == "polar-grid-2d":
        return polar_grid_nodes(region, quad.n_r, quad.n_theta)
    raise DomainError(f"method {quad.method!r} has no 2D node set")


def assemble_gram(w: WeightPair, gain: GainFunction, basis: BasisSpec, t: float,
                  quad: QuadratureSpec | None = None, lead: BasisSpec | None = None
                  ) -> GramSystem:
    """Gram matrix A[m][n] = int conj(u_m) u_n D, jet rows C, target d.

    With ``lead`` (a smaller spec), the basis is ordered so the leading block
    of the returned system is the ``lead`` problem.
    """
    quad = quad or QuadratureSpec()
    nu = len(w.jet_target)
    d = np.array(w.jet_target, dtype=complex)
    z0 = w.domain.base_point
    if quad.method == "adaptive-1d":
        if basis.n_min != 0:
            raise PreconditionError("radial fast path uses nonnegative powers")
        diag, errs, flags = radial_gram(w, gain, basis.n_max, t, tol=min(quad.tol, 1e-13))
        mb = MonomialBasis(range(basis.n_max + 1))
        A = np.diag(diag).astype(complex)
        sys = GramSystem(A, mb.jets(z0, nu), d, t, mb, entry_errors=errs,
                         meta={"quad_flag": worst_flag(flags), "method": quad.method})
        return sys
    if not w.domain.is_annulus and basis.n_min < 0:
        raise PreconditionError("negative powers on a region containing the center")
    region = region_of(w, t)
    fine = _nodes(region, gain, w, quad)
    coarse = _nodes(region, gain, w, quad.coarse())
    if fine.z.size == 0 or coarse.z.size == 0:
        raise AssemblyError(f"empty quadrature node set at t={t}")
    wf = fine.w * w.density_of_green(gain, fine.green)
    wc = coarse.w * w.density_of_green(gain, coarse.green)
    if basis.orthogonalize:
        b = ArnoldiBasis(basis, coarse.z, wc, lead=lead)
        Vc = b.sample_values
    else:
        b = MonomialBasis(range(basis.n_min, basis.n_max + 1), basis.center)
        if lead is not None:
            order = sorted(range(b.size), key=lambda i: (
                not (lead.n_min <= b.powers[i] <= lead.n_max), i))
            b = MonomialBasis(b.powers[order], basis.center)
        Vc = b.values(coarse.z)
    Vf = b.values(fine.z)
    A = _check_hermitian(np.conj(Vf).T @ (wf[:, None] * Vf), t)
    Ac = _check_hermitian(np.conj(Vc).T @ (wc[:, None] * Vc), t)
    C = b.jets(z0, nu)
    meta = {"method": quad.method, "nodes": int(fine.z.size),
            "lead_size": getattr(b, "lead_size", None), "quad_flag": FLAG_OK}
    if lead is not None and not basis.orthogonalize:
        meta["lead_size"] = lead.size
    return GramSystem(A, C, d, t, b, A_coarse=Ac, meta=meta)


# ---------------------------------------------------------------------------
# solve


def solve_constrained_min(sys: GramSystem, A: np.ndarray | None = None) -> MinimizerResult:
    """min x*Ax subject to Cx = d, by the saddle system and by the Schur
    complement; disagreement beyond 1e-9 relative is flagged."""
    A = sys.A if A is None else A
    C, d = sys.C, sys.d
    n = A.shape[0]
    nu = C.shape[0]
    dscale = 1.0 / np.sqrt(np.real(np.diag(A)))
    As = A * dscale[:, None] * dscale[None, :]
    Cs = C * dscale[None, :]
    rn = np.linalg.norm(Cs, axis=1)
    if np.any(rn == 0):
        raise SolverError(f"constraint row vanishes on the basis at t={sys.t}", t=sys.t)
    Cs = Cs / rn[:, None]
    ds = d / rn
    cond = float(np.linalg.cond(As))
    if not cond < COND_LIMIT:
        raise SolverError(f"Gram matrix numerically singular (cond {cond:.2e}) at t={sys.t}",
                          t=sys.t)
    K = np.zeros((n + nu, n + nu), dtype=complex)
    K[:n, :n] = As
    K[:n, n:] = Cs.conj().T
    K[n:, :n] = Cs
    rhs = np.concatenate([np.zeros(n, dtype=complex), ds])
    sol = sla.solve(K, rhs, assume_a="her")
    xs, mu = sol[:n], sol[n:]
    G = float(np.real(np.conj(xs) @ As @ xs))
    try:
        cho = sla.cho_factor(As, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Gram matrix not positive definite at t={sys.t}", t=sys.t) from exc
    Y = sla.cho_solve(cho, Cs.conj().T)
    S = Cs @ Y
    S = 0.5 * (S + S.conj().T)
    lam = sla.solve(S, ds, assume_a="her")
    G_schur = float(np.real(np.conj(ds) @ lam))
    flags = []
    if abs(G - G_schur) > AGREE_TOL * max(abs(G_schur), 1e-300):
        flags.append(FLAG_SOLVER)
    x = xs * dscale
    # row-wise backward error: jet rows of high order differ in scale by
    # many orders of magnitude, so an unscaled norm would mix them
    scale_rows = np.linalg.norm(C, axis=1) * np.linalg.norm(x) + np.abs(d)
    res = float(np.max(np.abs(C @ x - d) / scale_rows))
    return MinimizerResult(x=x, G=G, residual=res, dual=mu / rn, G_schur=G_schur,
                           flags=flags, t=sys.t, basis=sys.basis, cond=cond)


def _quad_error(sys: GramSystem, res: MinimizerResult) -> float:
    if sys.entry_errors is not None:
        # first-order sensitivity dG/dA_nn = |x_n|^2 for diagonal systems
        return float(np.sum(np.abs(res.x) ** 2 * sys.entry_errors)) + 4e-16 * res.G
    if sys.A_coarse is not None:
        coarse = solve_constrained_min(sys, sys.A_coarse)
        return abs(res.G - coarse.G)
    return 0.0


def minimal_integral(w: WeightPair, gain: GainFunction, basis: BasisSpec, t: float,
                     quad: QuadratureSpec | None = None) -> tuple[float, MinimizerResult]:
    """G(t) with the basis-stability check against n_max + 8.

    The extended system is assembled once; the base problem is its leading
    block. The reported error adds the quadrature estimate and the change
    under basis extension.
    """
    quad = quad or QuadratureSpec()
    ext = basis.extended()
    quad = quad.for_degree(max(abs(ext.n_min), abs(ext.n_max)))
    sys_ext = assemble_gram(w, gain, ext, t, quad, lead=basis)
    lead_size = sys_ext.meta.get("lead_size") or basis.size
    sys = sys_ext.leading(lead_size)
    res = solve_constrained_min(sys)
    res_ext = solve_constrained_min(sys_ext)
    res.quad_error = _quad_error(sys, res)
    if quad.method == "polar-grid-2d":
        dom = w.domain

        def mass(z):
            return np.abs(res.evaluate(z)) ** 2 * w.density_of_green(gain, dom.green(z))

        res.quad_error = max(res.quad_error, masking_error(region_of(w, t), quad, mass))
    res.basis_change = abs(res_ext.G - res.G)
    if res.basis_change > STABILITY_TOL * res.G:
        res.flags.append(FLAG_BASIS)
    if res.quad_error > quad.tol * res.G or sys.meta.get("quad_flag", FLAG_OK) != FLAG_OK:
        res.flags.append(FLAG_QUAD)
    if res.residual > 1e-10:
        res.flags.append(FLAG_SOLVER)
    return res.G, res


def bergman_kernel_value(w: WeightPair, gain: GainFunction, t: float,
                         basis: BasisSpec | None = None,
                         quad: QuadratureSpec | None = None) -> float:
    """Weighted Bergman kernel of {psi < -t} at z0: 1 / minimal integral with
    the single constraint f(z0) = 1."""
    if not (w.construction in ("power-green", "plain-power") and w.k == 0
            and w.object_kind == "function"):
        raise PreconditionError("Bergman kernel needs the k = 0 function problem")
    if w.jet_target != (1.0 + 0j,):
        raise PreconditionError("Bergman kernel uses the constraint f(z0) = 1")
    if not (gain.kind == "constant" and gain.values[0] == 1.0):
        raise PreconditionError("Bergman kernel uses c = 1")
    basis, quad = default_solver_setup(w, basis, quad)
    G, _ = minimal_integral(w, gain, basis, t, quad)
    return 1.0 / G


def default_solver_setup(w: WeightPair, basis: BasisSpec | None = None,
                         quad: QuadratureSpec | None = None,
                         n_max: int | None = None):
    """Radial problems use the diagonal path, the annulus a Laurent basis."""
    if quad is None:
        quad = QuadratureSpec("adaptive-1d" if w.domain.is_centered_disc else "arc-gauss-2d")
    if basis is None:
        if w.domain.is_annulus:
            n = n_max or 24
            basis = BasisSpec(-n, n)
        else:
            n = n_max or max(16, len(w.jet_target) + 4)
            basis = BasisSpec(0, n, orthogonalize=quad.method != "adaptive-1d")
    return basis, quad


def coefficient_drift(a: MinimizerResult, b: MinimizerResult, nodes=None, weights=None) -> float:
    """Distance between two extremals: coefficient distance when both use
    the same monomial basis, else the relative weighted L2 distance on the
    supplied nodes (the later, smaller region)."""
    if isinstance(a.basis, MonomialBasis) and isinstance(b.basis, MonomialBasis):
        m = max(a.x.size, b.x.size)
        xa = np.zeros(m, dtype=complex)
        xb = np.zeros(m, dtype=complex)
        xa[:a.x.size] = a.x
        xb[:b.x.size] = b.x
        return float(np.linalg.norm(xa - xb))
    if nodes is None:
        raise PreconditionError("function-level drift needs quadrature nodes")
    fa = a.evaluate(nodes)
    fb = b.evaluate(nodes)
    num = float(np.dot(weights, np.abs(fa - fb) ** 2))
    den = float(np.dot(weights, np.abs(fb) ** 2))
    return math.sqrt(num / den)


@dataclass
class ExtremalTrace:
    trace: object
    results: list[MinimizerResult]
    drift_steps: list[float]

    def max_drift(self, i: int, j: int) -> float:
        """Drift bound between grid points i < j: exact for monomial
        coefficients, else the sum of consecutive steps."""
        i, j = min(i, j), max(i, j)
        if all(isinstance(r.basis, MonomialBasis) for r in self.results[i:j + 1]):
            return max(coefficient_drift(self.results[i], r) for r in self.results[i:j + 1])
        return float(sum(self.drift_steps[i:j]))


def extremal_trace(w: WeightPair, gain: GainFunction, basis: BasisSpec | None, t_grid,
                   quad: QuadratureSpec | None = None, progress=None,
                   escalate_to: int | None = None) -> ExtremalTrace:
    """G(t_i) on an ascending grid with per-point results and drift.

    With ``escalate_to``, a point flagged basis-unstable is solved again with
    n_max raised in steps of 8 (Laurent bases grow at both ends) until the
    flag clears or n_max reaches ``escalate_to``. Later points start from the
    last accepted size; the bases used are listed in the trace metadata.
    """
    from .diagnostics import Trace

    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise DomainError("t grid must be nonempty, ascending and nonnegative")
    basis, quad = default_solver_setup(w, basis, quad)
    results = []
    drift = []
    used = []
    current = basis
    for i, t in enumerate(t_grid):
        while True:
            _, res = minimal_integral(w, gain, current, float(t), quad)
            if (escalate_to is None or FLAG_BASIS not in res.flags
                    or current.n_max >= escalate_to):
                break
            current = current.with_max(min(current.n_max + EXTENSION, escalate_to))
        used.append([current.n_min, current.n_max])
        results.append(res)
        if i > 0:
            if isinstance(res.basis, MonomialBasis):
                drift.append(coefficient_drift(results[i - 1], res))
            else:
                nodes = _nodes(region_of(w, float(t)), gain, w, quad.coarse())
                wts = nodes.w * w.density_of_green(gain, nodes.green)
                drift.append(coefficient_drift(results[i - 1], res, nodes.z, wts))
        if progress is not None:
            progress(i, t, res)
    flags = [r.flag for r in results]
    trace = Trace(t_grid.copy(), np.array([r.G for r in results]),
                  np.array([r.error for r in results]), "t-axis", flags=flags,
                  meta={"basis": [basis.n_min, basis.n_max], "method": quad.method,
                        "basis_used": used})
    return ExtremalTrace(trace, results, drift)
