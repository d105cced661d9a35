"""Independent reference computations used by the tests.

None of these call into the library's numerical kernels; they rebuild the
quantity from its definition with plain numpy / cvxpy.
"""

import numpy as np
from scipy.linalg import svdvals


def monomial_values(coeffs, zeta):
    """sum_{p,q} c[..., p, q] zeta^p conj(zeta)^q with explicit powers."""
    N = coeffs.shape[-1] - 1
    zp = zeta[..., None] ** np.arange(N + 1)
    zq = np.conj(zeta)[..., None] ** np.arange(N + 1)
    return np.einsum("...pq,xp,xq->...x", coeffs, zp.reshape(-1, N + 1), zq.reshape(-1, N + 1))


def cauchy_green_weights(zeta0, N, nrho=None, nphi=1024):
    """Weights I[p, q] with  T f(zeta0) = sum c[p, q] I[p, q]  for f of degree <= N.

    T f(zeta0) = -(1/pi) int_D f(tau) / (tau - zeta0) dA(tau).  Polar coordinates
    centred at zeta0 remove the singularity: tau = zeta0 + rho e^{i phi},
    dA / (tau - zeta0) = e^{-i phi} d rho d phi.  Gauss-Legendre in rho is exact
    for the polynomial integrand; the phi integrand is smooth and periodic.
    """
    nrho = nrho or N + 2
    phi = 2 * np.pi * np.arange(nphi) / nphi
    e = np.exp(1j * phi)
    s = np.real(np.conj(zeta0) * e)
    rmax = -s + np.sqrt(s * s + 1 - abs(zeta0) ** 2)
    x, w = np.polynomial.legendre.leggauss(nrho)
    rho = 0.5 * (x[:, None] + 1) * rmax[None, :]
    wt = 0.5 * w[:, None] * rmax[None, :] * (2 * np.pi / nphi) * np.conj(e)[None, :]
    tau = (zeta0 + rho * e[None, :]).reshape(-1)
    wt = wt.reshape(-1)
    zp = tau[:, None] ** np.arange(N + 1)
    zq = np.conj(tau)[:, None] ** np.arange(N + 1)
    return -np.einsum("x,xp,xq->pq", wt, zp, zq) / np.pi


def sampled_taming(J, directions, refine=200):
    """min of omega(u, J u) = u^T W J u over unit directions, sampled then refined.

    With ||A|| just above 1 the cone where the form is negative is thin, so the
    best sample is improved by shifted power iteration on the quadratic form;
    this uses only W and J, never the complex matrix A.
    """
    n = J.shape[-1] // 2
    W = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    S = 0.5 * (W @ J + (W @ J).T)
    vals = np.einsum("ki,ij,kj->k", directions, S, directions)
    best = float(np.min(vals))
    u = directions[np.argmin(vals)]
    shift = np.linalg.norm(S)
    for _ in range(refine):
        u = shift * u - S @ u
        u /= np.linalg.norm(u)
        best = min(best, float(u @ S @ u))
    return best


def chebyshev_distance_cvxpy(N, M=256):
    """min_q max_k |conj(zeta_k) - q(zeta_k)| over holomorphic q of degree <= N, by SOCP."""
    import cvxpy as cp

    theta = 2 * np.pi * np.arange(M) / M
    E = np.exp(1j * np.outer(theta, np.arange(N + 1)))
    target = np.exp(-1j * theta)
    a = cp.Variable(N + 1)
    b = cp.Variable(N + 1)
    t = cp.Variable()
    re = E.real @ a - E.imag @ b - target.real
    im = E.imag @ a + E.real @ b - target.imag
    cons = [cp.norm(cp.vstack([re[k], im[k]])) <= t for k in range(M)]
    cp.Problem(cp.Minimize(t), cons).solve()
    return float(t.value)


def scalar_kernel_dimensions(k, N, M=None):
    """Real kernel and cokernel dimensions of h -> Re(zeta^k h) on holomorphic degree-N h.

    The cokernel is counted through the adjoint condition Re(i zeta^{1-k} q) = 0.
    """
    M = M or 4 * (N + abs(k)) + 16
    theta = 2 * np.pi * np.arange(M) / M

    def nullity(factor):
        E = factor[:, None] * np.exp(1j * np.outer(theta, np.arange(N + 1)))
        A = np.hstack([E.real, -E.imag])
        sv = svdvals(A)
        return A.shape[1] - int(np.sum(sv > 1e-9 * sv[0]))

    ker = nullity(np.exp(1j * k * theta))
    coker = nullity(1j * np.exp(1j * (1 - k) * theta))
    return ker, coker
