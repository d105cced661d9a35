"""Discs with boundary on product tori: Newton correction, homotopy in t, free radii, foliations."""

import logging
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import cKDTree

from . import acs, cr
from .disc import BoundaryLoop, DiscFunction, Grid, grid
from .errors import (
    BoundednessAlarm,
    BoundaryMismatchError,
    ContinuationBreakdown,
    DegeneracyError,
    FieldConstructionError,
    FoliationAlarm,
    JDiscError,
    NonConvergenceError,
    SeparationAlarm,
)
from .fields import MatrixField, ScaledField, ZeroField, sample_ball
from .geometry import boundary_defect, maslov_index, symplectic_area, windings
from .rh import BoundaryMatrix, LinearRHProblem, PointConstraint, solve_linear_rh
from .solution import DiscSolution
from .torus import TorusSpec

log = logging.getLogger(__name__)

AREA_TOL = 1e-6


# --- normalisations ------------------------------------------------------------------

@dataclass(frozen=True)
class Normalization:
    """Affine point constraints Re(conj(d) Z_j(point)) = value, plus the radii left free."""

    constraints: tuple
    free_radii: bool = False
    kind: str = "custom"

    def residual(self, Z):
        worst = 0.0
        for c in self.constraints:
            val = Z.component(c.component)(np.array([c.point]))[0, 0]
            worst = max(worst, abs(np.real(np.conj(c.direction) * val) - c.value))
        return worst


def disc_normalization(p):
    """z(0) = 0 and Z(1) = p in the directions tangent to the torus through p.

    On the torus, Z(1) = p amounts to Im(conj(p_j) Z_j(1)) = 0 together with
    the sign of Re(conj(p_j) Z_j(1)), which Newton keeps from the start disc.
    """
    p = np.asarray(p, dtype=complex)
    cons = [PointConstraint(0, 0.0, 1.0, 0.0), PointConstraint(0, 0.0, 1j, 0.0)]
    cons += [PointConstraint(j, 1.0, 1j * p[j] / abs(p[j]), 0.0) for j in range(len(p))]
    return Normalization(tuple(cons), False, "through-point")


def anchor_normalization(a, b):
    """Z(0) = (a, b) and Im z(1) = 0 with the radii of the w-circles free."""
    anchor = np.concatenate([[complex(a)], np.atleast_1d(np.asarray(b, dtype=complex))])
    cons = []
    for j, val in enumerate(anchor):
        cons.append(PointConstraint(j, 0.0, 1.0, float(val.real)))
        cons.append(PointConstraint(j, 0.0, 1j, float(val.imag)))
    cons.append(PointConstraint(0, 1.0, 1j, 0.0))
    return Normalization(tuple(cons), True, "anchor")


def standard_disc(p, N):
    """zeta -> (p_1 zeta, p_2, ..., p_n): the disc h_c through p for the standard structure."""
    p = np.asarray(p, dtype=complex)
    series = np.zeros((len(p), 2), dtype=complex)
    series[0, 1] = p[0]
    series[1:, 0] = p[1:]
    return DiscFunction.holomorphic(series, N)


def mobius_disc(a, b, R, N):
    """z = sqrt(R) phi(zeta) with phi an automorphism, phi(0) = a / sqrt(R), phi(1) = 1; w = b.

    The series of phi is cut at degree N (error |a|^N / R^(N/2)).
    """
    sR = np.sqrt(R)
    alpha = complex(a) / sR
    if abs(alpha) >= 1:
        raise ValueError("anchor must lie inside the z-circle")
    u = (1 - alpha) / (1 - np.conj(alpha)) if alpha != 1 else 1.0
    k = np.arange(N + 1)
    geo = (-u * np.conj(alpha)) ** k
    phi = alpha * geo
    phi[1:] += u * geo[:-1]
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    series = np.zeros((1 + len(b), N + 1), dtype=complex)
    series[0] = sR * phi
    series[1:, 0] = b
    return DiscFunction.holomorphic(series, N)


# --- certificates ----------------------------------------------------------------------

def _is_zero_field(field):
    if isinstance(field, ZeroField):
        return True
    return isinstance(field, ScaledField) and (field.t == 0.0 or _is_zero_field(field.base))


def min_modulus(Z, components, g=None):
    """min over the closed disc of |Z_j| for the listed components (grid plus local polish)."""
    if not components:
        return np.inf
    g = g or cr.certificate_grid(Z.N)
    vals = np.abs(Z.on_grid(g))
    best = np.inf
    for j in components:
        v = vals[j]
        i, k = np.unravel_index(np.argmin(v), v.shape)
        best = min(best, float(v[i, k]), _polish_min(Z.component(j), g.r[i], g.theta[k]))
    return best


def _polish_min(f, r, th):
    from scipy.optimize import minimize

    def obj(x):
        rr = min(max(x[0], 0.0), 1.0)
        return float(np.abs(f(np.array([rr * np.exp(1j * x[1])]))[0, 0]))

    res = minimize(obj, [r, th], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
    return float(res.fun)


def certify(Z, field, torus, normalization, tol=1e-8, eta=None, expected_windings=None):
    """Full certificate of a disc with boundary on ``torus``."""
    n = Z.m
    cert, checks = {}, {}
    cert["cr_residual"] = cr.cr_residual(field, Z)
    checks["cr_residual"] = cert["cr_residual"] <= tol
    cert["boundary_residual"] = boundary_defect(Z, torus)
    checks["boundary_residual"] = cert["boundary_residual"] <= tol
    area = symplectic_area(Z)
    cert["area"] = area
    if expected_windings is None:
        expected_windings = (1,) + (0,) * (n - 1)
    target = np.pi * float(np.dot(expected_windings, torus.squared()))
    cert["area_error"] = abs(area - target)
    checks["area"] = cert["area_error"] <= AREA_TOL
    try:
        w = windings(Z)
    except DegeneracyError:
        w = None
    cert["windings"] = w
    checks["windings"] = w == tuple(expected_windings)
    cert["min_boundary_w"] = (
        float(np.min(np.abs(Z.boundary().samples(max(8 * Z.N, 64))[1:]))) if n > 1 else np.inf
    )
    cert["min_w"] = min_modulus(Z, list(range(1, n)))
    if eta is not None:
        checks["separation"] = cert["min_w"] >= eta
    cert["normalization_residual"] = normalization.residual(Z) if normalization else 0.0
    scale = max(1.0, float(np.max(torus.squared())))
    checks["normalization"] = cert["normalization_residual"] <= 1e-12 * scale
    try:
        cert["maslov"] = maslov_index(Z, torus, tol=max(1e-6, 10 * tol))
    except (BoundaryMismatchError, DegeneracyError):
        cert["maslov"] = None
    return DiscSolution(Z, cert, checks, {})


# --- Newton correction --------------------------------------------------------------------

def _diag_boundary(Z):
    loop = Z.boundary().conj()
    return BoundaryMatrix.diagonal([BoundaryLoop(loop.coeffs[j : j + 1]) for j in range(Z.m)])


def newton_correct(Z0, field, torus, normalization, tol=1e-10, max_iter=8, M=None, rel_obstruction=0.5,
                   obstruction_floor=1e-6):
    """Newton iteration for dbar Z = A(Z) conj(Z_zeta), |Z_j|^2 = r_j^2 on the circle, constraints.

    Each step solves the linearised Riemann-Hilbert problem with
    P = diag(conj Z_j) along the boundary.  With ``normalization.free_radii``
    the squared radii t_j of the w-circles are extra unknowns.  Returns
    (Z, torus, info); raises NonConvergenceError when the step does not fall
    below ``tol`` within ``max_iter`` iterations.
    """
    n, N = Z0.m, Z0.N
    M = M or 4 * N + 8
    g = grid(N)
    zero = _is_zero_field(field)
    free = None
    if normalization.free_radii and n > 1:
        free = np.zeros((n - 1, n))
        free[np.arange(n - 1), np.arange(1, n)] = -0.5
    Z, tor = Z0, torus
    steps, residuals = [], []
    for it in range(max_iter):
        nl = cr.nonlinear_term(field, Z, g) if not zero else DiscFunction.zeros(n, N - 1)
        r_int = Z.dbar() - nl
        vals = Z.boundary().samples(M)
        r_bd = np.abs(vals) ** 2 - tor.squared()[:, None]
        cons = []
        for c in normalization.constraints:
            cur = np.real(np.conj(c.direction) * Z.component(c.component)(np.array([c.point]))[0, 0])
            cons.append(PointConstraint(c.component, c.point, c.direction, c.value - cur))
        residuals.append(max(_sup(r_int, g), float(np.max(np.abs(r_bd))),
                             max((abs(c.value) for c in cons), default=0.0)))
        K = None if zero else cr.linearization(field, Z, g)
        problem = LinearRHProblem(_diag_boundary(Z), -r_int, -0.5 * r_bd, cons, free, K)
        sol = solve_linear_rh(problem, raise_on_obstruction=False)
        # near the truncation floor the least-squares residual is comparable to the defect;
        # only a large unexplained defect means the linear problem is obstructed
        if sol.residual > rel_obstruction * residuals[-1] and residuals[-1] > obstruction_floor:
            raise DegeneracyError(
                f"Newton step obstructed: linear residual {sol.residual:.3g} vs defect {residuals[-1]:.3g}"
            )
        Z = Z + sol.f
        if free is not None:
            tor = tor.with_t(np.array(tor.t) + sol.free)
        step = max(_sup(sol.f, g), float(np.max(np.abs(sol.free), initial=0.0)))
        steps.append(step)
        if not np.isfinite(step):
            break
        if step <= tol:
            return Z, tor, _newton_info(steps, residuals, it + 1)
        if len(steps) >= 3 and steps[-1] > steps[-2] > steps[-3]:
            break
    raise NonConvergenceError(
        f"Newton did not converge in {len(steps)} iterations (last step {steps[-1]:.3g})", history=steps
    )


def _sup(f, g):
    return float(np.max(np.abs(f.on_grid(g)), initial=0.0))


def _newton_info(steps, residuals, iterations):
    # quadratic decay: log e_{k+1} / log e_k ~ 2 over the last three iterates
    orders = []
    for a, b in zip(steps[-3:-1], steps[-2:]):
        if 0 < a < 1 and 0 < b < 1 and b > 1e-15:
            orders.append(np.log(b) / np.log(a))
    return {"iterations": iterations, "steps": steps, "residuals": residuals,
            "orders": [float(o) for o in orders]}


def solve_on_torus(Z0, field, torus, normalization, tol=1e-8, eta=None, newton_tol=1e-10, max_iter=8):
    """newton_correct followed by the certificate."""
    Z, tor, info = newton_correct(Z0, field, torus, normalization, newton_tol, max_iter)
    sol = certify(Z, field, tor, normalization, tol, eta)
    sol.info.update(info)
    sol.info["torus"] = tor
    return sol


# --- homotopy traces -----------------------------------------------------------------------

@dataclass
class HomotopyTrace:
    ts: list = dc_field(default_factory=list)
    solutions: list = dc_field(default_factory=list)
    step_sizes: list = dc_field(default_factory=list)
    failures: list = dc_field(default_factory=list)
    complete: bool = False

    def append(self, t, sol, dt):
        if self.ts and t <= self.ts[-1]:
            raise ValueError("trace parameters must increase")
        self.ts.append(float(t))
        self.solutions.append(sol)
        self.step_sizes.append(float(dt))

    def __len__(self):
        return len(self.ts)

    @property
    def final(self):
        return self.solutions[-1]

    @property
    def passed(self):
        return self.complete and all(s.passed for s in self.solutions)

    def rows(self):
        """Per-t certificate table."""
        out = []
        for t, s, dt in zip(self.ts, self.solutions, self.step_sizes):
            c = s.certificate
            w = c["windings"] or (np.nan,) * s.Z.m
            out.append([t, c["cr_residual"], c["boundary_residual"], c["area"], *w, c["min_w"],
                        c["normalization_residual"], dt, s.info.get("iterations", 0)])
        return out

    def columns(self, n):
        return (["t", "cr_residual", "boundary_residual", "area"]
                + [f"winding_{j}" for j in range(n)]
                + ["min_w", "normalization_residual", "step", "newton_iterations"])


def check_axis_condition(field, samples=2000, seed=3, tol=1e-12):
    """The axis {w = 0} is J-complex: the first column of A vanishes there."""
    if _is_zero_field(field):
        return True
    rng = np.random.default_rng(seed)
    Z = sample_ball(field.n, getattr(field, "rho_out", 3.0) * 1.1, samples, rng)
    Z[1:] = 0.0
    return bool(np.max(np.abs(field(Z)[:, 0])) <= tol)


def default_eta(field, torus):
    r0 = getattr(field, "r0", 0.0)
    if r0 > 0:
        return r0
    if torus.n < 2:
        return 0.0
    return 0.1 * float(np.min(np.sqrt(torus.t)))


def _continue(field, start, torus, normalization, tol, eta, dt0, dt_min, dt_max, max_steps, secant,
              max_newton, radius_bounds=None):
    """Shared predictor-corrector loop over s in [0, 1] for the fields s * A."""
    trace = HomotopyTrace()
    sol0 = certify(start, field.scaled(0.0), torus, normalization, tol, eta)
    sol0.info.update(iterations=0, torus=torus)
    trace.append(0.0, sol0, 0.0)
    t, dt = 0.0, dt0
    prev = None
    tor = torus
    while t < 1.0:
        if len(trace) > max_steps:
            raise ContinuationBreakdown(f"more than {max_steps} accepted steps", trace=trace)
        t_new = min(1.0, t + dt)
        cur = trace.final.Z
        guess = cur
        if secant and prev is not None:
            guess = cur + ((t_new - t) / (t - prev[0])) * (cur - prev[1])
        try:
            Z, tor_new, info = newton_correct(guess, field.scaled(t_new), tor, normalization, 1e-11,
                                              max_newton)
            sol = certify(Z, field.scaled(t_new), tor_new, normalization, tol, eta)
            sol.info.update(info, torus=tor_new)
            bad = [k for k in sol.failed_checks() if k != "separation"]
            if bad:
                raise NonConvergenceError(f"certificate failed at t = {t_new:.6g}: {bad}")
        except (NonConvergenceError, DegeneracyError, np.linalg.LinAlgError) as exc:
            trace.failures.append((t_new, str(exc)))
            dt *= 0.5
            log.info("step to t = %.6g rejected (%s); dt -> %.3g", t_new, exc, dt)
            if dt < dt_min:
                diag = bubbling_diagnostic([s.Z for s in trace.solutions[-4:]])
                raise ContinuationBreakdown(
                    f"step size underflow at t = {t:.6g}: {exc}", trace=trace, diagnostic=diag
                )
            continue
        if not sol.checks.get("separation", True):
            trace.append(t_new, sol, t_new - t)
            raise SeparationAlarm(
                f"disc at t = {t_new:.6g} reaches min |w| = {sol.certificate['min_w']:.3g} < eta = {eta:.3g}"
            )
        if radius_bounds is not None and tor_new.n > 1:
            lo, hi = radius_bounds
            tv = np.array(tor_new.t)
            if not np.all(np.isfinite(tv)) or np.any(tv < lo) or np.any(tv > hi):
                raise BoundednessAlarm(f"free radii left [{lo:.3g}, {hi:.3g}]: t = {tv}")
        prev = (t, cur)
        trace.append(t_new, sol, t_new - t)
        t, tor = t_new, tor_new
        if info["iterations"] <= 3:
            dt = min(dt_max, dt * 1.5)
    trace.complete = True
    return trace


def trace_family(field, p, torus=None, N=32, tol=1e-8, eta=None, dt0=0.25, dt_min=1e-6, dt_max=0.5,
                 max_steps=200, secant=True, max_newton=8):
    """Continue the disc zeta -> (p_1 zeta, p_2, ...) through p from J_st to J_A.

    The structures are those of t * A for t from 0 to 1.  ``torus`` defaults
    to the product of circles through p.
    """
    p = np.asarray(p, dtype=complex)
    if torus is None:
        torus = TorusSpec(abs(p[0]) ** 2, tuple(np.abs(p[1:]) ** 2))
    if not torus.contains(p, 1e-12 * max(1.0, float(np.max(torus.squared())))):
        raise BoundaryMismatchError("the point p does not lie on the torus")
    if getattr(field, "a0", 0.0) >= 1.0:
        raise FieldConstructionError("the field is not tamed (a0 >= 1)")
    if torus.n > 1 and not check_axis_condition(field):
        raise FieldConstructionError("the axis w = 0 is not J-complex: A(z, 0) has a nonzero first column")
    eta = default_eta(field, torus) if eta is None else eta
    start = standard_disc(p, N)
    return _continue(field, start, torus, disc_normalization(p), tol, eta, dt0, dt_min, dt_max,
                     max_steps, secant, max_newton)


# --- foliation sweeps ----------------------------------------------------------------------

@dataclass
class FoliationSample:
    qs: np.ndarray
    traces: list
    min_distance: float
    refined_min_distance: float
    pair: tuple
    grid_shape: tuple
    points: np.ndarray  # (count, nr, nt, n) values on the evaluation grid
    zeta: np.ndarray

    @property
    def stable(self):
        return self.refined_min_distance > 0.5 * self.min_distance > 0

    def rows(self):
        count, nr, nt, n = self.points.shape
        out = []
        for k in range(count):
            for i in range(nr):
                for j in range(nt):
                    z = self.zeta[i, j]
                    v = self.points[k, i, j]
                    row = [k, float(np.angle(self.qs[k])), z.real, z.imag]
                    for x in v:
                        row += [x.real, x.imag]
                    out.append(row)
        return out


def _eval_grid(nr, nt):
    r = np.linspace(0.0, 1.0, nr)
    th = 2 * np.pi * np.arange(nt) / nt
    return r[:, None] * np.exp(1j * th)[None, :]


def pairwise_min_distance(clouds):
    """Minimum distance between point clouds (list of (k, 2n) real arrays) and the offending pair."""
    trees = [cKDTree(c) for c in clouds]
    best, pair = np.inf, None
    for i in range(len(clouds)):
        for j in range(i + 1, len(clouds)):
            d, _ = trees[j].query(clouds[i], k=1)
            m = float(np.min(d))
            if m < best:
                best, pair = m, (i, j)
    return best, pair


def sweep_foliation(field, count=16, rho=1.0, R=1.0, N=32, tol=1e-8, eval_shape=(17, 64),
                    threshold=0.0, **controls):
    """Trace one disc per q = sqrt(rho) e^(2 pi i k / count) and check mutual disjointness.

    Distances are measured between images of an evaluation grid and again
    on the grid refined twice in each direction.
    """
    qs = np.sqrt(rho) * np.exp(2j * np.pi * np.arange(count) / count)
    torus = TorusSpec(R, (rho,))
    traces = []
    for q in qs:
        traces.append(trace_family(field, [np.sqrt(R), q], torus, N=N, tol=tol, **controls))
    discs = [tr.final.Z for tr in traces]

    def clouds(shape):
        zeta = _eval_grid(*shape)
        pts = np.stack([np.moveaxis(Z(zeta), 0, -1) for Z in discs])
        return zeta, pts, [acs.to_real(p.reshape(-1, p.shape[-1])) for p in pts]

    zeta, pts, cl = clouds(eval_shape)
    dmin, pair = pairwise_min_distance(cl)
    fine = (2 * eval_shape[0] - 1, 2 * eval_shape[1])
    _, _, cl_fine = clouds(fine)
    dfine, pair_fine = pairwise_min_distance(cl_fine)
    if dmin <= threshold or dfine <= threshold:
        bad = pair if dmin <= dfine else pair_fine
        raise FoliationAlarm(f"discs {bad} meet on the evaluation grid (distance {min(dmin, dfine):.3g})",
                             pair=bad)
    return FoliationSample(qs, traces, dmin, dfine, pair, eval_shape, pts, zeta)


# --- free radii (higher dimension) ----------------------------------------------------------

def solve_higher_dim(field, a, b, R=1.0, N=32, tol=1e-8, eta=None, dt0=0.25, dt_min=1e-6, dt_max=0.5,
                     max_steps=200, max_newton=8, radius_factor=1e3):
    """Disc with Z(0) = (a, b), z(1) = sqrt(R), boundary on |z|^2 = R, |w_j|^2 = t_j, t free.

    Starts from the standard solution (Moebius disc in z, w = b, t_j = |b_j|^2)
    and continues in the structure parameter.  Returns (DiscSolution, TorusSpec).
    """
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    if np.any(np.abs(b) == 0):
        raise ValueError("anchor components b_j must be nonzero")
    if getattr(field, "a0", 0.0) >= 1.0:
        raise FieldConstructionError("the field is not tamed (a0 >= 1)")
    torus = TorusSpec(R, tuple(np.abs(b) ** 2))
    if eta is None:
        r0 = getattr(field, "r0", 0.0)
        eta = r0 if r0 > 0 else 0.1 * float(np.min(np.abs(b)))
    norm = anchor_normalization(a, b)
    start = mobius_disc(a, b, R, N)
    t0 = np.abs(b) ** 2
    if _is_zero_field(field):
        sol = solve_on_torus(start, field, torus, norm, tol, eta, newton_tol=1e-13)
        return sol, sol.info["torus"]
    trace = _continue(field, start, torus, norm, tol, eta, dt0, dt_min, dt_max, max_steps, True,
                      max_newton, radius_bounds=(float(np.min(t0)) / radius_factor,
                                                 float(np.max(t0)) * radius_factor))
    sol = trace.final
    sol.info["trace"] = trace
    return sol, sol.info["torus"]


# --- bubbling ---------------------------------------------------------------------------------

def _energy_samples(Z, nr=None, nt=None):
    """Quadrature nodes, weights and |Z_zeta|^2 + |Z_zetabar|^2 on a Gauss-Legendre polar grid."""
    nr = nr or 2 * Z.N + 16
    nt = nt or 4 * Z.N + 32
    x, wx = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (x + 1.0)
    g = Grid(Z.N, nt=nt, radii=r)
    dens = np.sum(np.abs(Z.dz().on_grid(g)) ** 2 + np.abs(Z.dbar().on_grid(g)) ** 2, axis=0)
    w = (0.5 * wx * r)[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]
    return g.zeta, w, dens


def bubbling_diagnostic(solutions, radii=(0.5, 0.25, 0.125, 0.0625), fraction=0.05):
    """Energy-concentration scan along a sequence of discs.

    For each disc, the energy density |dZ|^2 is located at its grid maximum
    and the energy m_eps in balls of the given radii around it is measured.
    Concentration is flagged when sup |dZ| and the smallest-ball mass both
    grow along the sequence and, for the last disc, m_eps stays above
    ``fraction`` of the total energy at every radius.
    """
    entries = []
    for Z in solutions:
        zeta, w, dens = _energy_samples(Z)
        total = float(np.sum(dens * w))
        k = np.unravel_index(np.argmax(dens), dens.shape)
        center = zeta[k]
        masses = [float(np.sum((dens * w)[np.abs(zeta - center) < eps])) for eps in radii]
        entries.append({"total": total, "sup_gradient": float(np.sqrt(dens[k])), "center": complex(center),
                        "masses": masses})
    if len(entries) < 2:
        return {"flagged": False, "kind": None, "entries": entries, "principal_energy": None,
                "flagged_mass": 0.0}
    rising = lambda xs: all(b > a * (1 + 1e-3) for a, b in zip(xs, xs[1:]))
    growing = rising([e["sup_gradient"] for e in entries]) and rising([e["masses"][-1] for e in entries])
    last = entries[-1]
    concentrated = last["total"] > 0 and all(m >= fraction * last["total"] for m in last["masses"])
    flagged = growing and concentrated
    kind = None
    if flagged:
        # near the circle: a disc bubble; inside: sphere-type concentration, which the exact
        # symplectic form rules out, so it can only be a numerical pathology
        kind = "boundary" if abs(last["center"]) > 1 - 2 * radii[-1] else "interior-pathology"
    flagged_mass = last["masses"][-1] if flagged else 0.0
    return {"flagged": flagged, "kind": kind, "entries": entries,
            "principal_energy": last["total"] - flagged_mass, "flagged_mass": flagged_mass}


# --- non-squeezing --------------------------------------------------------------------------

class PushforwardField(MatrixField):
    """Constant complex matrix of S J_st S^-1 inside the ellipsoid |S^-1 (Z - c)| <= rho_in, cut off by rho_out."""

    name = "pushforward"

    def __init__(self, S, c, rho_in, rho_out):
        self.S = np.asarray(S, dtype=float)
        self.n = self.S.shape[0] // 2
        self.c = np.asarray(c, dtype=complex)
        self.Sinv = np.linalg.inv(self.S)
        J = self.S @ acs.j_standard(self.n) @ self.Sinv
        self.A = acs.j_to_a(J)
        self.rho_in, self.rho_out = float(rho_in), float(rho_out)
        self.a0 = float(acs.operator_norm(self.A))
        self.r0 = 0.0
        from .fields import CutoffPolynomialField, AffinePattern

        zero = np.zeros((self.n, self.n, self.n), dtype=complex)
        self._cut = CutoffPolynomialField(self.n, 1.0, AffinePattern(self.A, zero, zero), None, self.c,
                                          self.rho_in, self.rho_out, 0.0, metric=self.Sinv,
                                          a0=max(self.a0, 1e-300), name="pushforward")
        self.lipschitz = self._cut.lipschitz

    def evaluate(self, Z):
        return self._cut.evaluate(Z)

    def derivatives(self, Z):
        return self._cut.derivatives(Z)


def is_symplectic(S, tol=1e-10):
    n = S.shape[0] // 2
    Om = acs.omega_matrix(n)
    return bool(np.max(np.abs(S.T @ Om @ S - Om)) <= tol)


def block_rotation(n, angle):
    """Unitary (hence symplectic) rotation mixing z and w_1 by ``angle``."""
    U = np.eye(n, dtype=complex)
    c, s = np.cos(angle), np.sin(angle)
    U[0, 0], U[0, 1], U[1, 0], U[1, 1] = c, -s, s, c
    return acs.real_form(U, np.zeros_like(U))


@dataclass
class NonsqueezeReport:
    r: float
    R: float
    area: float
    lower: float
    upper: float
    verdict: bool
    solution: DiscSolution
    torus: TorusSpec
    center: np.ndarray
    notes: list


def nonsqueezing_demo(S, c, r, R, N=32, tol=1e-8, margin=1.0, area_tol=1e-3, quad=(64, 256)):
    """Check pi r^2 <= area of the disc inside Phi(r B) <= pi R^2 for Phi(x) = c + S x.

    Phi must be affine symplectic with Phi(r B) inside R D x C^(n-1).  The
    structure is the pushforward of J_st on an ellipsoid containing Phi(r B)
    and the disc, cut off outside it;
    the disc is solved with anchor Phi(0) and z-circle of radius R.
    """
    from .errors import DemoSetupError

    S = np.asarray(S, dtype=float)
    n = S.shape[0] // 2
    c = np.asarray(c, dtype=complex).copy()
    if not is_symplectic(S):
        raise DemoSetupError("the linear part is not symplectic")
    if r <= 0 or R <= 0:
        raise DemoSetupError("radii must be positive")
    rows_z = S[[0, n], :]
    reach = abs(c[0]) + r * np.linalg.norm(rows_z, 2)
    if reach > R * (1 + 1e-12):
        raise DemoSetupError(
            f"Phi(r B) is not contained in R D x C^{n - 1}: the z-projection reaches {reach:.6g} > R = {R}"
        )
    notes = []
    # keep the pushforward structure on an ellipsoid covering the whole disc: the cut-off is
    # C-infinity but not analytic, and polynomial truncation resolves it poorly
    cover = np.linalg.norm(np.linalg.inv(S), 2) * np.hypot(R + abs(c[0]), R)
    rho_in = max(r, 1.25 * cover)
    rho_out = rho_in * (1 + margin)
    # the w-hyperplanes must stay clear of the structure; translating in w is harmless
    for j in range(1, n):
        reach_w = rho_out * np.linalg.norm(S[[j, n + j], :], 2)
        if abs(c[j]) <= reach_w + margin:
            shift = reach_w + 2 * margin
            notes.append(f"translated w_{j} by {shift:.6g} to clear the hyperplane w_{j} = 0")
            c[j] = c[j] + shift
    field = PushforwardField(S, c, rho_in, rho_out)
    if field.a0 < 1e-14:
        field = ZeroField(n)
        notes.append("linear part is unitary: pushforward structure is standard")
    sol, torus = solve_higher_dim(field, c[0], c[1:], R**2, N=N, tol=tol)
    area = _area_inside(sol.Z, S, c, r, *quad)
    lower, upper = np.pi * r**2, np.pi * R**2
    verdict = lower - area_tol <= area <= upper + area_tol
    return NonsqueezeReport(r, R, area, lower, upper, bool(verdict and sol.passed), sol, torus, c, notes)


def _area_inside(Z, S, c, r, nrad, nang):
    """Area of Z^* omega over {zeta : |S^-1 (Z(zeta) - c)| < r}, polar around zeta = 0 (Z(0) = c)."""
    from scipy.optimize import brentq

    Sinv = np.linalg.inv(S)

    def gauge(zeta):
        vals = Z(np.atleast_1d(zeta)) - c[:, None]
        return np.linalg.norm(acs.to_real(vals.T) @ Sinv.T, axis=-1)

    x, wx = np.polynomial.legendre.leggauss(nrad)
    total = 0.0
    scan = np.linspace(0.0, 1.0, 129)
    for th in 2 * np.pi * np.arange(nang) / nang:
        e = np.exp(1j * th)
        vals = gauge(scan * e) - r
        idx = np.nonzero(vals >= 0)[0]
        if idx.size == 0:
            rho = 1.0
        else:
            k = idx[0]
            rho = brentq(lambda s: gauge(s * e)[0] - r, scan[k - 1], scan[k], xtol=1e-14)
        s = 0.5 * rho * (x + 1)
        zeta = s * e
        dz, db = Z.dz()(zeta), Z.dbar()(zeta)
        dens = np.sum(np.abs(dz) ** 2 - np.abs(db) ** 2, axis=0)
        total += np.sum(dens * s * wx) * 0.5 * rho
    return float(total * 2 * np.pi / nang)
