"""Linear Riemann-Hilbert problems on the disc.

The operator is f -> (df/dconj(zeta) - K f, Re(P f) on the circle) with an
optional real-linear interior term K, point constraints and free real
parameters entering the boundary rows.  Since the interior equation is
always solvable through the Cauchy-Green transform, the boundary problem is
reduced to the holomorphic part of f and solved by least squares there.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import lstsq, lu_factor, lu_solve, null_space

from . import cr
from .disc import BoundaryLoop, DiscFunction, monomials
from .errors import LopatinskiError, ObstructionError, ResolutionError
from .geometry import winding_of_samples

RANK_TOL = 1e-8


class BoundaryMatrix:
    """theta -> P(theta), an n x n matrix of trigonometric polynomials."""

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[None, None]
        if c.shape[0] != c.shape[1] or c.shape[2] % 2 == 0:
            raise ValueError("coefficients must have shape (n, n, 2K+1)")
        c.flags.writeable = False
        self.coeffs = c
        self.n = c.shape[0]
        self.K = (c.shape[2] - 1) // 2

    @classmethod
    def from_samples(cls, values, K=None):
        values = np.asarray(values, dtype=complex)
        n = values.shape[0]
        loop = BoundaryLoop.from_samples(values.reshape(n * n, -1), K)
        return cls(loop.coeffs.reshape(n, n, -1))

    @classmethod
    def diagonal(cls, entries):
        loops = [e if isinstance(e, BoundaryLoop) else BoundaryLoop(np.atleast_1d(e)) for e in entries]
        K = max(lp.K for lp in loops)
        n = len(loops)
        c = np.zeros((n, n, 2 * K + 1), dtype=complex)
        for j, lp in enumerate(loops):
            c[j, j, K - lp.K : K + lp.K + 1] = lp.coeffs[0]
        return cls(c)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n, dtype=complex)[:, :, None])

    @classmethod
    def monomial(cls, k):
        """Scalar P(theta) = exp(i k theta)."""
        c = np.zeros(2 * abs(k) + 1, dtype=complex)
        c[k + abs(k)] = 1.0
        return cls(c)

    def samples(self, M):
        loop = BoundaryLoop(self.coeffs.reshape(self.n * self.n, -1))
        return loop.samples(M).reshape(self.n, self.n, M)

    def det_samples(self, M):
        return np.linalg.det(np.moveaxis(self.samples(M), -1, 0))

    def check_lopatinski(self, M=None, tol=1e-10):
        M = M or max(8 * self.K + 16, 64)
        d = self.det_samples(M)
        scale = max(1.0, float(np.max(np.abs(self.coeffs))) ** self.n)
        if np.min(np.abs(d)) <= tol * scale:
            raise LopatinskiError(f"det P vanishes on the circle (min |det P| = {np.min(np.abs(d)):.3g})")
        return float(np.min(np.abs(d)))

    def det_winding(self, M=None):
        M = M or max(8 * self.K + 16, 64)
        self.check_lopatinski(M)
        while True:
            total, step = winding_of_samples(self.det_samples(M), 0.0)
            if step < np.pi / 4:
                return int(np.rint(total))
            M *= 2

    def partial_windings(self, M=None):
        """Winding numbers of the diagonal entries (diagnostic only)."""
        M = M or max(8 * self.K + 16, 64)
        s = self.samples(M)
        return tuple(int(np.rint(winding_of_samples(s[j, j], 0.0)[0])) for j in range(self.n))


@dataclass(frozen=True)
class PointConstraint:
    """Re(conj(direction) * f_component(point)) = value."""

    component: int
    point: complex = 0.0
    direction: complex = 1.0
    value: float = 0.0


def point_constraints(component, point, target):
    """Both real parts of f_component(point) = target."""
    return [
        PointConstraint(component, point, 1.0, float(np.real(target))),
        PointConstraint(component, point, 1j, float(np.imag(target))),
    ]


def boundary_eval(N, theta):
    """Complex matrix of coefficient vector -> values on the circle at theta."""
    P, Q = monomials(N)
    return np.exp(1j * np.outer(theta, P - Q))


def _real_cols(W):
    """Row map w . c (complex) turned into Re(w . c) on stacked [Re c; Im c]."""
    return np.concatenate([W.real, -W.imag], axis=-1)


def boundary_operator(P, N, M):
    """Real matrix (n M, 2 n L_N): stacked coefficients -> Re(P f) at M angles."""
    n = P.n
    theta = 2 * np.pi * np.arange(M) / M
    E = boundary_eval(N, theta)
    Ps = P.samples(M)
    L = E.shape[1]
    W = np.zeros((n, M, n, L), dtype=complex)
    for j in range(n):
        for l in range(n):
            W[j, :, l, :] = Ps[j, l][:, None] * E
    return _real_cols(W.reshape(n * M, n * L))


def constraint_operator(constraints, n, N):
    P, Q = monomials(N)
    L = len(P)
    W = np.zeros((len(constraints), n * L), dtype=complex)
    for row, c in enumerate(constraints):
        z0 = complex(c.point)
        W[row, c.component * L : (c.component + 1) * L] = np.conj(c.direction) * z0**P * np.conj(z0) ** Q
    values = np.array([c.value for c in constraints], dtype=float)
    return _real_cols(W), values


def apply_L(P, f, M=None):
    """(dbar f, Re(P f) sampled at M angles)."""
    M = M or max(4 * f.N, 8)
    vals = f.boundary().samples(M)
    Ps = P.samples(M)
    return f.dbar(), np.real(np.einsum("jlm,lm->jm", Ps, vals))


@dataclass
class LinearRHProblem:
    P: BoundaryMatrix
    h: DiscFunction
    g: np.ndarray
    constraints: list = dc_field(default_factory=list)
    free: np.ndarray = None
    interior: np.ndarray = None

    @property
    def N(self):
        return self.h.N


@dataclass
class RHSolution:
    f: DiscFunction
    free: np.ndarray
    residual: float
    singular_values: np.ndarray


def solve_linear_rh(problem, tol=1e-10, raise_on_obstruction=True):
    """Least-squares solution of the truncated linear RH problem.

    The interior equation is solved exactly through T; the holomorphic part
    and the free parameters are the minimum-norm least-squares solution of
    the collocated boundary rows subject to the constraints, which hold
    exactly whenever they are consistent.
    """
    P = problem.P
    n, N = P.n, problem.N
    g = np.atleast_2d(np.asarray(problem.g, dtype=float))
    M = g.shape[1]
    if problem.h.degree() > N - 1:
        raise ValueError("interior data must have degree <= N - 1")
    Tr = cr.cauchy_green_real(n, N)
    hol = cr.holomorphic_embedding(n, N)
    hvec = problem.h.to_vector(N - 1)
    if problem.interior is None:
        f0 = Tr @ hvec
        Fa = np.zeros((Tr.shape[0], len(hol)))
    else:
        K = np.asarray(problem.interior)
        S = np.eye(K.shape[0]) - (Tr.T @ K.T).T
        lu = lu_factor(S)
        f0 = Tr @ lu_solve(lu, hvec)
        Fa = Tr @ lu_solve(lu, K[:, hol])
    Fa[hol, np.arange(len(hol))] += 1.0
    Rb = boundary_operator(P, N, M)
    rows = [Rb @ Fa]
    rhs = [g.reshape(-1) - Rb @ f0]
    nfree = 0 if problem.free is None else np.asarray(problem.free).shape[0]
    if nfree:
        B = np.repeat(np.asarray(problem.free, dtype=float).T, M, axis=0)
        rows[0] = np.hstack([rows[0], B])
    if problem.constraints:
        Rc, vals = constraint_operator(problem.constraints, n, N)
        block = Rc @ Fa
        if nfree:
            block = np.hstack([block, np.zeros((len(vals), nfree))])
        rows.append(block)
        rhs.append(vals - Rc @ f0)
    if len(rows) == 1:
        A, b = rows[0], rhs[0]
        x, _, _, sv = lstsq(A, b, lapack_driver="gelsd")
    else:
        # constraints hold exactly: minimise the boundary misfit on their solution set
        B, C = rows
        x0, *_ = lstsq(C, rhs[1], lapack_driver="gelsd")
        Nc = null_space(C)
        y, _, _, sv = lstsq(B @ Nc, rhs[0] - B @ x0, lapack_driver="gelsd")
        x = x0 + Nc @ y
        A, b = np.vstack(rows), np.concatenate(rhs)
    res = A @ x - b
    residual = float(np.max(np.abs(res), initial=0.0))
    fvec = f0 + Fa @ x[: len(hol)]
    f = DiscFunction.from_vector(fvec, n, N)
    sol = RHSolution(f, x[len(hol):], residual, sv)
    if residual > tol and raise_on_obstruction:
        direction = res / np.linalg.norm(res)
        raise ObstructionError(
            f"linear RH system not solvable at the truncated level (residual {residual:.3g})",
            residual=residual,
            direction=direction,
        )
    return sol


# --- Fredholm index ------------------------------------------------------------

def _holomorphic_collocation(Ps, N):
    """Real matrix h -> Re(P h) on the samples Ps (n, n, M), h holomorphic of degree N."""
    n, _, M = Ps.shape
    theta = 2 * np.pi * np.arange(M) / M
    E = np.exp(1j * np.outer(theta, np.arange(N + 1)))
    W = np.einsum("jlm,mk->jmlk", Ps, E).reshape(n * M, n * (N + 1))
    return _real_cols(W)


def _nullity(A, rel=RANK_TOL):
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return A.shape[1]
    rank = int(np.sum(sv > rel * sv[0]))
    return A.shape[1] - rank


def kernel_cokernel(P, N, M=None):
    """Real dimensions of kernel and cokernel of h -> Re(P h)|_circle on holomorphic h.

    The cokernel is counted as the kernel of the adjoint homogeneous problem
    Re(i zeta P^{-T} k) = 0, k holomorphic.
    """
    M = M or 4 * (N + P.K) + 16
    Ps = P.samples(M)
    theta = 2 * np.pi * np.arange(M) / M
    Pinv_t = np.transpose(np.linalg.inv(np.moveaxis(Ps, -1, 0)), (2, 1, 0))
    Padj = 1j * np.exp(1j * theta) * Pinv_t
    return _nullity(_holomorphic_collocation(Ps, N)), _nullity(_holomorphic_collocation(Padj, N))


@dataclass
class IndexReport:
    index: int
    formula_index: int
    kernel: int
    cokernel: int
    N: int
    N0: int
    det_winding: int
    partial_windings: tuple
    constrained_kernel: int = None
    constrained_cokernel: int = None
    ladder: dict = dc_field(default_factory=dict)


def fredholm_index(P, constraints=0, free=None, N=32, ladder_step=4):
    """Index of f -> (dbar f, Re(P f)|_b, constraints) with free boundary parameters.

    Computed twice: from the winding of det P (n - 2 wind det P + #free -
    #constraints) and from SVD nullities of the truncated boundary operator
    and its adjoint.  Disagreement, or a rank count that changes between N
    and N - ladder_step, raises ResolutionError.
    """
    n = P.n
    P.check_lopatinski()
    wind = P.det_winding()
    count = constraints if isinstance(constraints, int) else len(constraints)
    nfree = 0 if free is None else np.asarray(free).shape[0]
    formula = n - 2 * wind + nfree - count

    ladder = {}
    Ns = sorted({max(N - j * ladder_step, 1) for j in range(4)} | {N})
    for Nk in Ns:
        ker, coker = kernel_cokernel(P, Nk)
        ladder[Nk] = (ker, coker, ker - coker + nfree - count)
    ker, coker, rank_index = ladder[N]
    if rank_index != formula:
        raise ResolutionError(
            f"index mismatch: rank count {rank_index} vs winding formula {formula} at N = {N}"
        )
    N0 = N
    for Nk in sorted(ladder, reverse=True):
        if ladder[Nk] == ladder[N]:
            N0 = Nk
        else:
            break
    prev = max(N - ladder_step, 1)
    if prev != N and ladder[prev] != ladder[N]:
        raise ResolutionError(f"rank counts not stabilised between N = {prev} and N = {N}")
    report = IndexReport(rank_index, formula, ker, coker, N, N0, wind, P.partial_windings(), ladder=ladder)
    if not isinstance(constraints, int):
        M = 4 * (N + P.K) + 16
        A = _holomorphic_collocation(P.samples(M), N)
        if nfree:
            A = np.hstack([A, np.repeat(np.asarray(free, dtype=float).T, M, axis=0)])
        Rc = _constraint_rows_holomorphic(constraints, n, N)
        if nfree:
            Rc = np.hstack([Rc, np.zeros((len(constraints), nfree))])
        kc = _nullity(np.vstack([A, Rc]))
        report.constrained_kernel = kc
        report.constrained_cokernel = kc - rank_index
    return report


def _constraint_rows_holomorphic(constraints, n, N):
    W = np.zeros((len(constraints), n * (N + 1)), dtype=complex)
    for row, c in enumerate(constraints):
        z0 = complex(c.point)
        W[row, c.component * (N + 1) : (c.component + 1) * (N + 1)] = np.conj(c.direction) * z0 ** np.arange(N + 1)
    return _real_cols(W)


# --- non-approximability of conj(zeta) -------------------------------------------

def dbar_distance_witness(N, M=None, iterations=200, tol=1e-13):
    """min over holomorphic polynomials q of degree <= N of sup_circle |conj(zeta) - q(zeta)|.

    Lawson's iteratively reweighted least squares for complex Chebyshev
    approximation on M boundary samples.
    """
    M = M or 8 * (N + 2)
    theta = 2 * np.pi * np.arange(M) / M
    target = np.exp(-1j * theta)
    E = np.exp(1j * np.outer(theta, np.arange(N + 1)))
    w = np.full(M, 1.0 / M)
    best = np.inf
    for _ in range(iterations):
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(E * sw[:, None], target * sw, rcond=None)
        err = np.abs(target - E @ coef)
        best = min(best, float(np.max(err)))
        new = w * err
        total = np.sum(new)
        if total == 0.0:
            break
        new /= total
        if np.max(np.abs(new - w)) < tol:
            break
        w = new
    return best
