"""Linear algebra of almost complex structures on C^n.

Tangent vectors of C^n are identified with R^{2n} through the block ordering
``(x_1, ..., x_n, y_1, ..., y_n)``.  An R-linear operator on C^n is stored as
a real ``(2n, 2n)`` array; a complex matrix as a complex ``(n, n)`` array.
All functions accept leading batch dimensions.
"""

import numpy as np

from .errors import ConversionDomainError, TamingError

DEFAULT_TOL = 1e-10


def j_standard(n):
    """Real matrix of multiplication by i."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def omega_matrix(n):
    """Gram matrix of the standard symplectic form: omega(u, v) = u^T W v."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def omega(u, v):
    """Standard symplectic form sum_j dx_j ^ dy_j on real tangent vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.shape[-1] // 2
    return np.sum(u[..., :n] * v[..., n:] - u[..., n:] * v[..., :n], axis=-1)


def to_real(v):
    """C^n vector(s) -> R^{2n} in block ordering."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag], axis=-1)


def to_complex(u):
    u = np.asarray(u, dtype=float)
    n = u.shape[-1] // 2
    return u[..., :n] + 1j * u[..., n:]


def real_form(linear, antilinear=None):
    """Real matrix of v -> L v + K conj(v) for complex matrices L, K."""
    L = np.asarray(linear, dtype=complex)
    K = np.zeros_like(L) if antilinear is None else np.asarray(antilinear, dtype=complex)
    top = np.concatenate([L.real + K.real, -L.imag + K.imag], axis=-1)
    bottom = np.concatenate([L.imag + K.imag, L.real - K.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def complex_parts(M):
    """Split a real (2n, 2n) matrix into (L, K) with M v = L v + K conj(v)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1] // 2
    xx, xy = M[..., :n, :n], M[..., :n, n:]
    yx, yy = M[..., n:, :n], M[..., n:, n:]
    L = 0.5 * ((xx + yy) + 1j * (yx - xy))
    K = 0.5 * ((xx - yy) + 1j * (yx + xy))
    return L, K


def cayley_q(J):
    """Q = (J_st + J)^{-1} (J_st - J)."""
    J = np.asarray(J, dtype=float)
    n = J.shape[-1] // 2
    jst = j_standard(n)
    plus = jst + J
    det = np.linalg.det(plus)
    scale = np.max(np.abs(plus), axis=(-2, -1)) ** (2 * n)
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise ConversionDomainError("J_st + J is singular; J is outside the conversion domain")
    return np.linalg.solve(plus, jst - J)


def j_to_a(J):
    """Complex matrix A of an almost complex structure J.

    A is the unique matrix with A conj(v) = Q v where
    Q = (J_st + J)^{-1}(J_st - J).
    """
    Q = cayley_q(J)
    _, K = complex_parts(Q)
    return K


def a_to_j(A):
    """Inverse of :func:`j_to_a`: J = J_st (I - Q)(I + Q)^{-1}."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[-1]
    gram = np.eye(n) - A @ np.conj(A)
    det = np.linalg.det(gram)
    if np.any(np.abs(det) <= 1e-14):
        raise ConversionDomainError("det(I - A conj(A)) vanishes; A is outside the conversion domain")
    Q = real_form(np.zeros_like(A), A)
    eye = np.eye(2 * n)
    # J (I + Q) = J_st (I - Q)  ->  (I + Q)^T J^T = (I - Q)^T J_st^T
    lhs = np.swapaxes(eye + Q, -1, -2)
    rhs = np.swapaxes(j_standard(n) @ (eye - Q), -1, -2)
    return np.swapaxes(np.linalg.solve(lhs, rhs), -1, -2)


def operator_norm(A):
    """Operator 2-norm (largest singular value) of complex matrices."""
    return np.linalg.norm(np.asarray(A, dtype=complex), ord=2, axis=(-2, -1))


def is_tamed(A):
    """True iff the structure with complex matrix A is tamed by omega_st."""
    return bool(np.all(operator_norm(A) < 1.0))


def is_calibrated(A, tol=DEFAULT_TOL):
    """Tamed and A symmetric."""
    A = np.asarray(A, dtype=complex)
    symmetric = np.max(np.abs(A - np.swapaxes(A, -1, -2)), initial=0.0) <= tol
    return bool(symmetric and is_tamed(A))


def taming_form(J):
    """Symmetric part of u -> omega(u, J u) as a real matrix."""
    J = np.asarray(J, dtype=float)
    n = J.shape[-1] // 2
    S = omega_matrix(n) @ J
    return 0.5 * (S + np.swapaxes(S, -1, -2))


def canonical_metric(J, u, v):
    """g(u, v) = (omega(u, J v) + omega(v, J u)) / 2 for a tamed J."""
    J = np.asarray(J, dtype=float)
    if np.min(np.linalg.eigvalsh(taming_form(J))) <= 0.0:
        raise TamingError("J is not tamed by the standard symplectic form")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    Ju = np.einsum("...ij,...j->...i", J, u)
    Jv = np.einsum("...ij,...j->...i", J, v)
    return 0.5 * (omega(u, Jv) + omega(v, Ju))


def metric_matrix(J):
    """Gram matrix G of the canonical metric, g(u, v) = u^T G v."""
    return taming_form(J)


def complex_frame(J):
    """Real matrix F with F J_st = J F, built from the real coordinate axes.

    The columns are ``(e_1, ..., e_n, J e_1, ..., J e_n)``; for tamed J the
    real subspace R^n is Lagrangian hence totally real, so F is invertible.
    """
    J = np.asarray(J, dtype=float)
    n = J.shape[-1] // 2
    E = np.eye(2 * n)[:, :n]
    F = np.concatenate([E, J @ E], axis=-1)
    if abs(np.linalg.det(F)) < 1e-12:
        raise ConversionDomainError("real axes are not totally real for J")
    return F
