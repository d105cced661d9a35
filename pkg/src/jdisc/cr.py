"""The Cauchy-Riemann operator Z -> Z_zetabar - A(Z) conj(Z_zeta) on DiscFunctions.

Real-linear maps between coefficient spaces are stored as real matrices
acting on stacked vectors ``[Re x; Im x]`` where ``x`` is the flat complex
coefficient vector (component major, then the layout of
:func:`jdisc.disc.monomials`).
"""

import functools

import numpy as np
import scipy.sparse as sp

from . import acs
from .disc import DiscFunction, Grid, cauchy_green_table, dbar_matrix, grid, monomial_count, monomials


def nonlinear_term(field, Z, g=None):
    """Projection of A(Z) conj(Z_zeta) onto monomials of degree <= N - 1."""
    g = g or grid(Z.N)
    Zg = Z.on_grid(g)
    Zz = Z.dz().on_grid(g)
    prod = np.einsum("ij...,j...->i...", field(Zg), np.conj(Zz))
    return DiscFunction.project(prod, Z.N, Z.N - 1, g)


def residual_grid(field, Z, g):
    """Pointwise Z_zetabar - A(Z) conj(Z_zeta) on a grid, shape (n, nr, nt)."""
    Zg = Z.on_grid(g)
    lhs = Z.dbar().on_grid(g)
    rhs = np.einsum("ij...,j...->i...", field(Zg), np.conj(Z.dz().on_grid(g)))
    return lhs - rhs


def cr_residual(field, Z, g=None):
    """Sup of the CR defect on a grid finer than the projection grid."""
    g = g or certificate_grid(Z.N)
    return float(np.max(np.abs(residual_grid(field, Z, g))))


@functools.lru_cache(maxsize=16)
def certificate_grid(N):
    return Grid(N, 3 * N + 4, 6 * N + 8)


def coefficient_residual(field, Z, g=None):
    """dbar Z - Proj(A(Z) conj(Z_zeta)) as a DiscFunction of degree <= N - 1."""
    return Z.dbar() - nonlinear_term(field, Z, g)


# --- multiplication operators ----------------------------------------------------

def multiplier_matrix(G, g, degree_out):
    """Complex matrix of phi -> Proj_{degree_out}(G phi) on monomials phi of degree <= g.N.

    ``G`` holds grid values (nr, nt).  Multiplying by a single angular mode
    shifts the FFT of G, so the product's modes are gathered directly.
    """
    N = g.N
    P, Q = monomials(N)
    k0 = P - Q
    s = P + Q
    Ghat = np.fft.fft(G, axis=-1) / g.nt
    idx = (g.ks[:, None] - k0[None, :]) % g.nt
    by_k = np.transpose(Ghat[:, idx], (1, 0, 2)) * (g.r[:, None] ** s[None, :])[None]
    C = g.project_by_frequency(by_k, degree_out)
    rows, slots = g.kform_index(degree_out)
    return C[rows, slots]


@functools.lru_cache(maxsize=None)
def _conj_maps(N):
    """Index maps used to express conj(phi) and conj(d phi / d zeta) in the basis."""
    P, Q = monomials(N)
    pos = -np.ones((N + 1, N + 1), dtype=int)
    pos[P, Q] = np.arange(len(P))
    swap = pos[Q, P]
    has_d = P >= 1
    dswap = np.where(has_d, pos[Q, np.maximum(P - 1, 0)], 0)
    return swap, has_d, dswap, P.astype(float)


def linearization(field, Z, g=None):
    """Real matrix of the derivative of Z -> Proj(A(Z) conj(Z_zeta)).

    delta -> A conj(delta_zeta) + (dA[delta]) conj(Z_zeta), mapping degree N
    coefficients to degree N - 1 coefficients.
    """
    g = g or grid(Z.N)
    n, N = Z.m, Z.N
    Zg = Z.on_grid(g)
    cz = np.conj(Z.dz().on_grid(g))
    A = field(Zg)
    Dz, Db = field.derivatives(Zg)
    B = np.einsum("ilk...,l...->ik...", Dz, cz)
    C = np.einsum("ilk...,l...->ik...", Db, cz)
    Lin, Lout = monomial_count(N), monomial_count(N - 1)
    swap, has_d, dswap, Pf = _conj_maps(N)
    L = np.zeros((n * Lout, n * Lin), dtype=complex)
    K = np.zeros((n * Lout, n * Lin), dtype=complex)
    for i in range(n):
        rows = slice(i * Lout, (i + 1) * Lout)
        for k in range(n):
            cols = slice(k * Lin, (k + 1) * Lin)
            if np.any(B[i, k]):
                L[rows, cols] = multiplier_matrix(B[i, k], g, N - 1)
            block = np.zeros((Lout, Lin), dtype=complex)
            if np.any(C[i, k]):
                block += multiplier_matrix(C[i, k], g, N - 1)[:, swap]
            if np.any(A[i, k]):
                MA = multiplier_matrix(A[i, k], g, N - 1)
                block += np.where(has_d[None, :], MA[:, dswap] * Pf[None, :], 0.0)
            K[rows, cols] = block
    return acs.real_form(L, K)


# --- fixed linear operators in the real stacked layout ------------------------------

@functools.lru_cache(maxsize=None)
def cauchy_green_real(n, N):
    """Sparse real matrix of T on n components, degree N-1 -> degree N."""
    T = sp.kron(sp.identity(n), cauchy_green_table(N))
    return sp.block_diag([T, T]).tocsr()


@functools.lru_cache(maxsize=None)
def dbar_real(n, N):
    D = sp.kron(sp.identity(n), dbar_matrix(N))
    return sp.block_diag([D, D]).tocsr()


@functools.lru_cache(maxsize=None)
def holomorphic_embedding(n, N):
    """Column indices of the real stacked full layout holding zeta^p coefficients.

    Ordering: [Re h_{j,p}] for j, p then [Im h_{j,p}].
    """
    P, Q = monomials(N)
    Lin = len(P)
    hol = np.nonzero(Q == 0)[0]
    re = np.concatenate([j * Lin + hol for j in range(n)])
    return np.concatenate([re, n * Lin + re])
