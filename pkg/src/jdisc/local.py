"""Local existence of J-complex discs: the integral equation Z - T(A(Z) conj(Z_zeta)) = W."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import acs, cr
from .disc import DiscFunction, cauchy_green, grid
from .errors import DivergenceError, NonConvergenceError, ScaleError
from .fields import MatrixField, sample_ball
from .geometry import symplectic_area
from .solution import DiscSolution

log = logging.getLogger(__name__)


# --- normalising charts ----------------------------------------------------------

class ChartField(MatrixField):
    """Complex matrix of J in the affine chart Z = p + delta F U.

    F is real-linear with F J_st = J(p) F, so the structure is standard at
    U = 0, and the dilation delta shrinks the field on the unit ball.
    """

    def __init__(self, base, p, F, delta):
        self.base = base
        self.n = base.n
        self.p = np.asarray(p, dtype=complex)
        self.F = np.asarray(F, dtype=float)
        self.Finv = np.linalg.inv(self.F)
        self.delta = float(delta)
        self.L, self.K = acs.complex_parts(self.F)
        self.name = f"chart({base.name})"
        self.r0 = 0.0
        self.a0 = 0.0
        self.lipschitz = self.delta * np.linalg.norm(self.F, 2) * getattr(base, "lipschitz", 0.0)

    def to_original(self, U):
        U = np.asarray(U, dtype=complex)
        shape = (-1,) + (1,) * (U.ndim - 1)
        lin = np.einsum("ij,j...->i...", self.L, U) + np.einsum("ij,j...->i...", self.K, np.conj(U))
        return self.p.reshape(shape) + self.delta * lin

    def to_chart(self, Z):
        Z = np.asarray(Z, dtype=complex)
        shape = (-1,) + (1,) * (Z.ndim - 1)
        Li, Ki = acs.complex_parts(self.Finv)
        D = (Z - self.p.reshape(shape)) / self.delta
        return np.einsum("ij,j...->i...", Li, D) + np.einsum("ij,j...->i...", Ki, np.conj(D))

    def pull_back(self, U):
        """DiscFunction in chart coordinates -> DiscFunction in original coordinates."""
        const = DiscFunction.constant(self.p, U.N)
        return const + self.delta * U.real_linear(self.L, self.K)

    def _structure(self, U):
        Zp = self.to_original(U)
        A = np.moveaxis(self.base(Zp), (0, 1), (-2, -1))
        J = acs.a_to_j(A)
        Jc = self.Finv @ J @ self.F
        return Zp, A, J, Jc

    def evaluate(self, U):
        _, _, _, Jc = self._structure(U)
        return np.moveaxis(acs.j_to_a(Jc), (-2, -1), (0, 1))

    def derivatives(self, U):
        n = self.n
        Zp, A, J, Jc = self._structure(U)
        jst = acs.j_standard(n)
        eye = np.eye(2 * n)
        Q = acs.real_form(np.zeros_like(A), A)
        IQinv = np.linalg.inv(eye + Q)
        Qc = acs.cayley_q(Jc)
        Pinv = np.linalg.inv(jst + Jc)
        shape = (n, n, n) + U.shape[1:]
        Dz = np.zeros(shape, dtype=complex)
        Db = np.zeros(shape, dtype=complex)
        for k in range(n):
            parts = []
            for direction in (1.0, 1j):
                dU = np.zeros(n, dtype=complex)
                dU[k] = direction
                dZ = self.delta * (self.L @ dU + self.K @ np.conj(dU))
                dZ = np.broadcast_to(dZ.reshape((n,) + (1,) * (U.ndim - 1)), U.shape)
                dA = np.moveaxis(self.base.directional(Zp, dZ), (0, 1), (-2, -1))
                dQ = acs.real_form(np.zeros_like(dA), dA)
                dJ = -2.0 * jst @ IQinv @ dQ @ IQinv
                dJc = self.Finv @ dJ @ self.F
                dQc = -Pinv @ dJc @ (eye + Qc)
                parts.append(np.moveaxis(acs.complex_parts(dQc)[1], (-2, -1), (0, 1)))
            dx, dy = parts
            Dz[:, :, k] = 0.5 * (dx - 1j * dy)
            Db[:, :, k] = 0.5 * (dx + 1j * dy)
        return Dz, Db


def normalize_chart(field, p, lam0, samples=4096, seed=0, max_halvings=60):
    """Affine chart sending p to 0 and J(p) to J_st, dilated until sup ||A|| <= lam0 on the unit ball.

    The dilation is the largest dyadic value whose sampled sup norm (inflated
    by the Lipschitz slack of the sample spacing) stays below lam0.
    """
    p = np.asarray(p, dtype=complex)
    n = field.n
    A_p = np.moveaxis(field(p.reshape(n, 1)), -1, 0)[0]
    F = acs.complex_frame(acs.a_to_j(A_p))
    rng = np.random.default_rng(seed)
    U = sample_ball(n, 1.0, samples, rng)
    delta = 1.0
    for _ in range(max_halvings):
        chart = ChartField(field, p, F, delta)
        sup = float(np.max(acs.operator_norm(np.moveaxis(chart(U), (0, 1), (-2, -1)))))
        if sup <= lam0:
            chart.a0 = sup
            return chart
        delta *= 0.5
    raise ScaleError(f"could not reach sup ||A|| <= {lam0} within {max_halvings} dilations")


# --- the local problem -------------------------------------------------------------

@dataclass
class LocalProblem:
    field: MatrixField
    W: DiscFunction
    p: np.ndarray = None
    v: np.ndarray = None
    lam: float = 1.0


def anchored_green(g):
    """T g corrected by holomorphic terms so the result vanishes at 0 with zero xi-derivative.

    Used when the disc must pass through a point with a prescribed direction:
    Z = p + lam v zeta + anchored_green(g) then has Z(0) = p and Z_xi(0) = lam v.
    """
    Tg = cauchy_green(g).coeffs.copy()
    Tg[:, 0, 0] = 0.0
    Tg[:, 1, 0] = -g.coeffs[:, 0, 0]
    return DiscFunction(Tg)


def _values_sup(f, g=None):
    return float(np.max(np.abs(f.on_grid(g)), initial=0.0))


class _Iteration:
    def __init__(self, field, base, anchored):
        self.field = field
        self.base = base
        self.anchored = anchored
        self.g = grid(base.N)

    def image(self, Z):
        nl = cr.nonlinear_term(self.field, Z, self.g)
        corr = anchored_green(nl) if self.anchored else cauchy_green(nl)
        return self.base + corr, nl

    def jacobian(self, Z):
        """Real matrix of Z -> Z - base - R(N(Z)) linearised at Z."""
        n, N = Z.m, Z.N
        K = cr.linearization(self.field, Z, self.g)
        Tr = cr.cauchy_green_real(n, N)
        RK = (Tr @ K) if not self.anchored else self._anchored_real(K, n, N)
        return np.eye(RK.shape[0]) - RK

    @staticmethod
    def _anchored_real(K, n, N):
        Tr = cr.cauchy_green_real(n, N)
        RK = np.asarray(Tr @ K)
        Lfull = RK.shape[0] // (2 * n)
        Lint = K.shape[0] // (2 * n)
        for part in range(2):
            for j in range(n):
                c00 = part * n * Lfull + j * Lfull
                c10 = c00 + (N + 1)  # (p, q) = (1, 0) follows the p = 0 row of length N + 1
                RK[c00] = 0.0
                RK[c10] = -K[part * n * Lint + j * Lint]
        return RK


def solve_local(problem, tol=1e-10, max_iter=40, newton_switch=0.8, max_halvings=12, use_chart=False,
                lam0=0.3):
    """Solve Z - T(A(Z) conj(Z_zeta)) = W by Picard iteration, Newton-accelerated when slow.

    With ``p`` and ``v`` given, the disc passes through p with
    Z_xi(0) = lam v; lam starts at ``problem.lam`` and is halved while the
    iteration fails to contract.
    """
    field = problem.field
    if use_chart:
        if problem.p is None:
            raise ValueError("a chart needs an anchor point")
        chart = normalize_chart(field, problem.p, lam0)
        n = field.n
        v = np.zeros(n, dtype=complex) if problem.v is None else np.asarray(problem.v, dtype=complex)
        vU = chart.to_chart(chart.p + v)
        sub = LocalProblem(chart, problem.W, np.zeros(n, dtype=complex), vU, problem.lam)
        sol = solve_local(sub, tol, max_iter, newton_switch, max_halvings, False)
        Z = chart.pull_back(sol.Z)
        out = _certify_local(field, Z, problem.p, v, sol.info["lam"], tol)
        out.info.update(sol.info, chart_delta=chart.delta, chart_sup=chart.a0)
        return out

    anchored = problem.p is not None
    lam = float(problem.lam)
    for _ in range(max_halvings + 1):
        if anchored:
            n, N = field.n, problem.W.N
            v = np.zeros(n) if problem.v is None else np.asarray(problem.v, dtype=complex)
            series = np.zeros((n, 2), dtype=complex)
            series[:, 0] = problem.p
            series[:, 1] = lam * v
            base = DiscFunction.holomorphic(series, N)
        else:
            base = problem.W
        try:
            Z, info = _iterate(field, base, anchored, tol, max_iter, newton_switch)
        except DivergenceError:
            if not anchored:
                raise
            log.info("contraction failed at lam = %g, halving", lam)
            lam *= 0.5
            continue
        info["lam"] = lam
        sol = _certify_local(field, Z, problem.p, problem.v, lam, tol)
        sol.info.update(info)
        return sol
    raise DivergenceError("no dyadic lam gives a contraction", ratio=float("nan"), history=[])


def _iterate(field, base, anchored, tol, max_iter, newton_switch):
    it = _Iteration(field, base, anchored)
    Z = base
    steps, residuals, ratios = [], [], []
    scale = max(1.0, _values_sup(base))
    noise = 1e-13 * scale
    # derivatives of degree-N polynomials amplify value round-off by ~N^2
    floor = 2e-13 * base.N**2 * scale
    method = "picard"
    for k in range(max_iter):
        Znew, nl = it.image(Z)
        residuals.append(_values_sup(Z.dbar() - nl, it.g))
        step = _values_sup(Znew - Z, it.g)
        if not np.isfinite(step):
            raise DivergenceError("iteration produced non-finite values", ratio=np.inf, history=residuals)
        steps.append(step)
        if len(steps) > 1 and steps[-2] > 100 * noise:
            ratios.append(steps[-1] / steps[-2])
        Z = Znew
        if step <= tol * 1e-2 or (residuals[-1] <= tol * 1e-2 and step <= tol):
            break
        if len(residuals) > 6 and residuals[-1] <= floor and min(residuals[-3:]) >= 0.5 * min(residuals[:-3]):
            break
        if len(ratios) >= 3 and min(ratios[-3:]) >= 1.0:
            raise DivergenceError(
                f"Picard iteration diverges (ratio {ratios[-1]:.3g})", ratio=ratios[-1], history=residuals
            )
        if len(ratios) >= 3 and ratios[-1] > newton_switch:
            method = "newton"
            Z = _newton(it, Z, tol, steps, residuals)
            break
    measured = float(max(ratios)) if ratios else 0.0
    final = _values_sup(Z.dbar() - cr.nonlinear_term(field, Z, it.g), it.g)
    if final > max(tol, floor):
        raise NonConvergenceError(
            f"local iteration stopped at residual {final:.3g} after {len(steps)} steps", history=residuals
        )
    info = {"iterations": len(steps), "ratio": measured, "noise_floor": floor, "ratios": ratios, "steps": steps,
            "residuals": residuals, "method": method}
    return Z, info


def _newton(it, Z, tol, steps, residuals, max_newton=12):
    n, N = Z.m, Z.N
    for _ in range(max_newton):
        Zimg, nl = it.image(Z)
        F = (Z - Zimg).to_vector()
        residuals.append(_values_sup(Z.dbar() - nl, it.g))
        lu = lu_factor(it.jacobian(Z))
        dZ = DiscFunction.from_vector(-lu_solve(lu, F), n, N)
        Z = Z + dZ
        step = _values_sup(dZ, it.g)
        steps.append(step)
        if step <= tol * 1e-2:
            break
    return Z


def _certify_local(field, Z, p, v, lam, tol):
    res = cr.cr_residual(field, Z)
    cert = {"cr_residual": res, "area": symplectic_area(Z)}
    checks = {"cr_residual": res <= tol}
    if p is not None:
        at0 = Z(np.zeros(1))[:, 0]
        cert["anchor_error"] = float(np.max(np.abs(at0 - np.asarray(p))))
        checks["anchor"] = cert["anchor_error"] <= 1e-12 * max(1.0, float(np.max(np.abs(p))))
        if v is not None:
            dxi = Z.dxi()(np.zeros(1))[:, 0]
            cert["direction_error"] = float(np.max(np.abs(dxi - lam * np.asarray(v))))
            checks["direction"] = cert["direction_error"] <= 1e-10 * max(1.0, float(np.max(np.abs(v))))
    return DiscSolution(Z, cert, checks, {})


def local_family(field, p, v, radius, count=8, seed=0, N=16, tol=1e-10, lam=1.0):
    """Solutions over random data (p', v') within ``radius`` of (p, v).

    Returns (base solution, list of solutions, measured continuity constant
    sup-deviation / data-distance).
    """
    rng = np.random.default_rng(seed)
    n = field.n
    p = np.asarray(p, dtype=complex)
    v = np.asarray(v, dtype=complex)
    W = DiscFunction.zeros(n, N)
    base = solve_local(LocalProblem(field, W, p, v, lam), tol)
    sols, worst = [], 0.0
    for _ in range(count):
        d = rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n))
        d *= radius * rng.random() / np.linalg.norm(d)
        sol = solve_local(LocalProblem(field, W, p + d[0], v + d[1], base.info["lam"]), tol)
        dist = float(np.linalg.norm(d))
        dev = _values_sup(sol.Z - base.Z)
        worst = max(worst, dev / dist if dist > 0 else 0.0)
        sols.append(sol)
    return base, sols, worst
