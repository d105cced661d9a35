"""Polynomial functions on the closed unit disc.

A :class:`DiscFunction` with ``m`` components and truncation degree ``N``
stores coefficients ``c[j, p, q]`` of the monomials ``zeta**p * conj(zeta)**q``
with ``p + q <= N``.  On this basis the operators d/dzeta, d/dconj(zeta) and
the Cauchy-Green transform act exactly.

Products with general nonlinearities go through a polar grid: ``2N``
Chebyshev radii times ``4N`` equispaced angles.  Grid values are projected
back to the basis frequency by frequency (FFT in the angle, small least
squares problems in the radius).
"""

import functools

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_triangular

from .errors import TruncationError


@functools.lru_cache(maxsize=None)
def monomials(N):
    """Exponent arrays ``(P, Q)`` of all monomials with ``p + q <= N``.

    The order (p major, q minor) defines the flat coefficient layout used by
    every matrix in the library.
    """
    P, Q = [], []
    for p in range(N + 1):
        for q in range(N + 1 - p):
            P.append(p)
            Q.append(q)
    return np.array(P, dtype=int), np.array(Q, dtype=int)


def monomial_count(N):
    return (N + 1) * (N + 2) // 2 if N >= 0 else 0


@functools.lru_cache(maxsize=None)
def _flat_position(N):
    P, Q = monomials(N)
    pos = -np.ones((N + 1, N + 1), dtype=int)
    pos[P, Q] = np.arange(len(P))
    return pos


class Grid:
    """Polar tensor grid with spectral evaluation and projection for degree N."""

    def __init__(self, N, nr=None, nt=None, radii=None):
        self.N = int(N)
        if radii is not None:
            nr = len(radii)
        self.nr = int(nr or max(2 * self.N, 4))
        self.nt = int(nt or max(4 * self.N, 8))
        if self.nt < 2 * self.N + 1:
            raise ValueError("angular resolution too small for the degree")
        i = np.arange(self.nr)
        # r[0] = 1 puts the boundary circle on the grid
        self.r = np.cos(np.pi * i / (2 * self.nr)) if radii is None else np.asarray(radii, dtype=float)
        self.theta = 2 * np.pi * np.arange(self.nt) / self.nt
        self.zeta = self.r[:, None] * np.exp(1j * self.theta)[None, :]

        N = self.N
        self.ks = np.arange(-N, N + 1)
        self.slots = N // 2 + 1
        S = self.slots
        kabs = np.abs(self.ks)[:, None]
        s = kabs + 2 * np.arange(S)[None, :]
        self.valid = s <= N
        self.s = np.where(self.valid, s, 0)
        self.kp = np.where(self.valid, (s + self.ks[:, None]) // 2, 0)
        self.kq = np.where(self.valid, (s - self.ks[:, None]) // 2, 0)
        self.V = np.where(self.valid[:, None, :], self.r[None, :, None] ** self.s[:, None, :], 0.0)
        self._qr = {}

    def to_kform(self, coeffs):
        """(..., N+1, N+1) monomial coefficients -> (..., 2N+1, slots)."""
        return coeffs[..., self.kp, self.kq] * self.valid

    def from_kform(self, C):
        out = np.zeros(C.shape[:-2] + (self.N + 1, self.N + 1), dtype=complex)
        out[..., self.kp[self.valid], self.kq[self.valid]] = C[..., self.valid]
        return out

    def radial_modes(self, C):
        """k-form coefficients -> Fourier modes on the radii, (..., nr, 2N+1)."""
        return np.einsum("kri,...ki->...rk", self.V, C)

    def synthesize(self, modes):
        """(..., nr, 2N+1) Fourier modes -> (..., nr, nt) grid values."""
        full = np.zeros(modes.shape[:-1] + (self.nt,), dtype=complex)
        full[..., self.ks % self.nt] = modes
        return np.fft.ifft(full, axis=-1) * self.nt

    def evaluate(self, coeffs):
        return self.synthesize(self.radial_modes(self.to_kform(coeffs)))

    def factors(self, degree):
        """Per-frequency QR factors of the radial Vandermonde columns with s <= degree."""
        if degree not in self._qr:
            out = []
            for row, k in enumerate(self.ks):
                cols = np.nonzero(self.valid[row] & (self.s[row] <= degree))[0]
                if abs(k) > degree or len(cols) == 0:
                    out.append(None)
                    continue
                Qm, Rm = np.linalg.qr(self.V[row][:, cols])
                out.append((cols, Qm, Rm))
            self._qr[degree] = out
        return self._qr[degree]

    def analyze(self, values):
        """(..., nr, nt) grid values -> Fourier modes (..., nr, 2N+1)."""
        return (np.fft.fft(values, axis=-1) / self.nt)[..., self.ks % self.nt]

    def project_modes(self, modes, degree=None):
        # back substitution keeps the fit backward stable despite the
        # ill-conditioned monomial radial basis (cond ~ 1e12 at N = 32)
        degree = self.N if degree is None else int(degree)
        batch = modes.shape[:-2]
        flat = modes.reshape((-1, self.nr, len(self.ks)))
        C = self.project_by_frequency(np.transpose(flat, (2, 1, 0)), degree)
        C = np.transpose(C, (2, 0, 1)).reshape(batch + (len(self.ks), self.slots))
        return self.from_kform(C)

    def project_by_frequency(self, by_k, degree):
        """(2N+1, nr, batch) radial mode profiles -> k-form coefficients (2N+1, slots, batch)."""
        C = np.zeros((len(self.ks), self.slots, by_k.shape[-1]), dtype=complex)
        for row, fac in enumerate(self.factors(degree)):
            if fac is None:
                continue
            cols, Qm, Rm = fac
            C[row, cols] = solve_triangular(Rm, Qm.T @ by_k[row])
        return C

    def kform_index(self, degree):
        """(frequency row, slot) of each monomial of degree <= ``degree`` in flat order."""
        P, Q = monomials(degree)
        return P - Q + self.N, (P + Q - np.abs(P - Q)) // 2

    def project(self, values, degree=None):
        """Least-squares projection of grid values onto monomials of degree <= degree."""
        return self.project_modes(self.analyze(values), degree)


@functools.lru_cache(maxsize=32)
def grid(N, nr=None, nt=None):
    return Grid(N, nr, nt)


class DiscFunction:
    """C^m-valued polynomial in zeta and conj(zeta) of total degree <= N.  Immutable."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError("coefficients must have shape (m, N+1, N+1)")
        N = c.shape[1] - 1
        P, Q = np.indices((N + 1, N + 1))
        if np.any(c[:, P + Q > N]):
            raise TruncationError("coefficients above the truncation degree")
        c.flags.writeable = False
        self._c = c

    # --- construction ------------------------------------------------------
    @classmethod
    def zeros(cls, m, N):
        return cls(np.zeros((m, N + 1, N + 1), dtype=complex))

    @classmethod
    def from_terms(cls, m, N, terms):
        """Build from ``{(j, p, q): coefficient}``."""
        c = np.zeros((m, N + 1, N + 1), dtype=complex)
        for (j, p, q), value in terms.items():
            if p + q > N:
                raise TruncationError(f"monomial degree {p + q} exceeds N = {N}")
            c[j, p, q] += value
        return cls(c)

    @classmethod
    def constant(cls, values, N):
        values = np.atleast_1d(np.asarray(values, dtype=complex))
        c = np.zeros((len(values), N + 1, N + 1), dtype=complex)
        c[:, 0, 0] = values
        return cls(c)

    @classmethod
    def holomorphic(cls, series, N):
        """Components sum_k series[j][k] zeta^k (series shape (m, K))."""
        series = np.atleast_2d(np.asarray(series, dtype=complex))
        if series.shape[1] > N + 1 and np.any(series[:, N + 1:]):
            raise TruncationError("holomorphic series longer than the truncation degree")
        c = np.zeros((series.shape[0], N + 1, N + 1), dtype=complex)
        K = min(series.shape[1], N + 1)
        c[:, :K, 0] = series[:, :K]
        return cls(c)

    @classmethod
    def stack(cls, parts):
        N = max(f.N for f in parts)
        return cls(np.concatenate([f.resized(N).coeffs for f in parts], axis=0))

    @classmethod
    def project(cls, values, N, degree=None, g=None):
        """Project values on ``grid(N)`` (shape (m, nr, nt)) to degree ``degree``."""
        g = g or grid(N)
        return cls(_pad(g.project(np.asarray(values), degree), N))

    # --- basic data ----------------------------------------------------------
    @property
    def coeffs(self):
        return self._c

    @property
    def m(self):
        return self._c.shape[0]

    @property
    def N(self):
        return self._c.shape[1] - 1

    def degree(self, tol=0.0):
        P, Q = np.indices((self.N + 1, self.N + 1))
        nz = np.any(np.abs(self._c) > tol, axis=0)
        return int(np.max(P + Q, where=nz, initial=-1))

    def component(self, j):
        return DiscFunction(self._c[j : j + 1])

    def resized(self, N):
        """Same function at truncation degree N; raises if terms would be lost."""
        if N == self.N:
            return self
        c = np.zeros((self.m, N + 1, N + 1), dtype=complex)
        k = min(N, self.N) + 1
        c[:, :k, :k] = self._c[:, :k, :k]
        P, Q = np.indices((k, k))
        c[:, :k, :k][:, P + Q > N] = 0.0
        if N < self.N and self.degree() > N:
            raise TruncationError(f"degree {self.degree()} does not fit into N = {N}")
        return DiscFunction(c)

    def truncated(self, degree):
        c = np.array(self._c)
        P, Q = np.indices((self.N + 1, self.N + 1))
        c[:, P + Q > degree] = 0.0
        return DiscFunction(c)

    # --- arithmetic ----------------------------------------------------------
    def _coerce(self, other):
        if other.N != self.N:
            N = max(other.N, self.N)
            return self.resized(N), other.resized(N)
        return self, other

    def __add__(self, other):
        a, b = self._coerce(other)
        return DiscFunction(a._c + b._c)

    def __sub__(self, other):
        a, b = self._coerce(other)
        return DiscFunction(a._c - b._c)

    def __neg__(self):
        return DiscFunction(-self._c)

    def __mul__(self, scalar):
        return DiscFunction(self._c * complex(scalar))

    __rmul__ = __mul__

    def matrix_apply(self, M):
        """Components mixed by a constant complex matrix: (M f)_i = sum_j M_ij f_j."""
        return DiscFunction(np.einsum("ij,jpq->ipq", np.asarray(M, dtype=complex), self._c))

    def real_linear(self, L, K):
        """Pointwise v -> L v + K conj(v) with constant complex matrices."""
        return self.matrix_apply(L) + self.conj().matrix_apply(K)

    def conj(self):
        return DiscFunction(np.conj(np.swapaxes(self._c, 1, 2)))

    # --- calculus ------------------------------------------------------------
    def dbar(self):
        """d/dconj(zeta): zeta^p conj(zeta)^q -> q zeta^p conj(zeta)^(q-1)."""
        c = np.zeros_like(self._c)
        q = np.arange(1, self.N + 1)
        c[:, :, :-1] = self._c[:, :, 1:] * q
        return DiscFunction(c)

    def dz(self):
        c = np.zeros_like(self._c)
        p = np.arange(1, self.N + 1)[:, None]
        c[:, :-1, :] = self._c[:, 1:, :] * p
        return DiscFunction(c)

    def dxi(self):
        return self.dz() + self.dbar()

    def deta(self):
        return 1j * (self.dz() - self.dbar())

    def is_holomorphic(self):
        return not np.any(self._c[:, :, 1:])

    # --- evaluation ----------------------------------------------------------
    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        powers = zeta[None] ** np.arange(self.N + 1).reshape((-1,) + (1,) * zeta.ndim)
        return np.einsum("jpq,p...,q...->j...", self._c, powers, np.conj(powers))

    def on_grid(self, g=None):
        """Values on ``g`` (default ``grid(N)``), shape (m, nr, nt)."""
        g = g or grid(self.N)
        if g.N < self.N:
            raise ValueError("grid degree below the function degree")
        return g.evaluate(self.resized(g.N).coeffs) if g.N != self.N else g.evaluate(self._c)

    def boundary(self, M=None):
        """Boundary trace as a :class:`BoundaryLoop` (Fourier data exact)."""
        P, Q = np.indices((self.N + 1, self.N + 1))
        K = self.N
        coef = np.zeros((self.m, 2 * K + 1), dtype=complex)
        keep = P + Q <= self.N
        np.add.at(coef, (slice(None), (P - Q)[keep] + K), self._c[:, keep])
        return BoundaryLoop(coef, M)

    def sup_norm(self, g=None):
        return float(np.max(np.abs(self.on_grid(g)), initial=0.0))

    def coeff_norm(self):
        return float(np.max(np.abs(self._c), initial=0.0))

    # --- flat layouts ----------------------------------------------------------
    def flat(self, degree=None):
        """Complex coefficient vector (j major, then the (p, q) layout of :func:`monomials`)."""
        degree = self.N if degree is None else degree
        P, Q = monomials(degree)
        if degree < self.N and self.degree() > degree:
            raise TruncationError("flat layout below the function degree")
        c = self.resized(max(degree, self.N)).coeffs
        return c[:, P, Q].reshape(-1)

    @classmethod
    def from_flat(cls, vec, m, N, degree=None):
        degree = N if degree is None else degree
        P, Q = monomials(degree)
        c = np.zeros((m, N + 1, N + 1), dtype=complex)
        c[:, P, Q] = np.asarray(vec, dtype=complex).reshape(m, len(P))
        return cls(c)

    def to_vector(self, degree=None):
        v = self.flat(degree)
        return np.concatenate([v.real, v.imag])

    @classmethod
    def from_vector(cls, vec, m, N, degree=None):
        vec = np.asarray(vec, dtype=float)
        h = len(vec) // 2
        return cls.from_flat(vec[:h] + 1j * vec[h:], m, N, degree)

    # --- text serialization ----------------------------------------------------
    def to_text(self):
        P, Q = monomials(self.N)
        lines = [f"{self.m} {self.N}"]
        for j in range(self.m):
            for p, q in zip(P, Q):
                c = self._c[j, p, q]
                lines.append(f"{j} {p} {q} {c.real:.17g} {c.imag:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        m, N = int(rows[0][0]), int(rows[0][1])
        c = np.zeros((m, N + 1, N + 1), dtype=complex)
        for j, p, q, re, im in rows[1:]:
            c[int(j), int(p), int(q)] = complex(float(re), float(im))
        return cls(c)

    def __eq__(self, other):
        return isinstance(other, DiscFunction) and self._c.shape == other._c.shape and bool(
            np.array_equal(self._c, other._c)
        )

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"DiscFunction(m={self.m}, N={self.N}, degree={self.degree()})"


def _pad(coeffs, N):
    if coeffs.shape[-1] == N + 1:
        return coeffs
    out = np.zeros(coeffs.shape[:-2] + (N + 1, N + 1), dtype=complex)
    k = min(N + 1, coeffs.shape[-1])
    out[..., :k, :k] = coeffs[..., :k, :k]
    return out


class BoundaryLoop:
    """Trigonometric polynomial loops theta -> C^m, theta in [0, 2 pi) counterclockwise."""

    def __init__(self, coeffs, M=None):
        c = np.atleast_2d(np.array(coeffs, dtype=complex))
        if c.shape[1] % 2 == 0:
            raise ValueError("Fourier data must cover frequencies -K..K")
        c.flags.writeable = False
        self.coeffs = c
        self.K = (c.shape[1] - 1) // 2
        self.M = int(M or max(4 * self.K, 8))

    @property
    def m(self):
        return self.coeffs.shape[0]

    @classmethod
    def from_samples(cls, values, K=None):
        values = np.atleast_2d(np.asarray(values, dtype=complex))
        M = values.shape[1]
        K = (M - 1) // 2 if K is None else K
        if 2 * K + 1 > M:
            raise ValueError("too few samples for the requested bandwidth")
        F = np.fft.fft(values, axis=1) / M
        ks = np.arange(-K, K + 1)
        return cls(F[:, ks % M], M)

    def frequency(self, k):
        if abs(k) > self.K:
            return np.zeros(self.m, dtype=complex)
        return self.coeffs[:, k + self.K]

    def theta(self, M=None):
        M = M or self.M
        return 2 * np.pi * np.arange(M) / M

    def samples(self, M=None):
        """Values at M equispaced angles, shape (m, M)."""
        M = M or self.M
        if M < 2 * self.K + 1:
            t = self.theta(M)
            ks = np.arange(-self.K, self.K + 1)
            return self.coeffs @ np.exp(1j * np.outer(ks, t))
        full = np.zeros((self.m, M), dtype=complex)
        ks = np.arange(-self.K, self.K + 1)
        full[:, ks % M] = self.coeffs
        return np.fft.ifft(full, axis=1) * M

    def derivative(self):
        ks = np.arange(-self.K, self.K + 1)
        return BoundaryLoop(self.coeffs * (1j * ks), self.M)

    def conj(self):
        return BoundaryLoop(np.conj(self.coeffs[:, ::-1]), self.M)


# --- Cauchy-Green transform ----------------------------------------------------

@functools.lru_cache(maxsize=None)
def cauchy_green_table(N):
    """Closed-form action of T on monomials of degree <= N - 1.

    T(zeta^p conj(zeta)^q) = (zeta^p conj(zeta)^(q+1) - [p > q] zeta^(p-q-1)) / (q+1)

    Returned as a sparse matrix from the degree N-1 layout to the degree N layout.
    """
    P, Q = monomials(N - 1)
    pos = _flat_position(N)
    rows, cols, vals = [], [], []
    for col, (p, q) in enumerate(zip(P, Q)):
        rows.append(pos[p, q + 1])
        cols.append(col)
        vals.append(1.0 / (q + 1))
        if p >= q + 1:
            rows.append(pos[p - q - 1, 0])
            cols.append(col)
            vals.append(-1.0 / (q + 1))
    return sp.csr_matrix((vals, (rows, cols)), shape=(monomial_count(N), len(P)))


def cauchy_green(f):
    """T f(zeta) = -(1/pi) int_D f(tau) / (tau - zeta) dA(tau), exactly on the basis.

    ``f`` must have degree <= N - 1; the result has the same truncation N.
    """
    if f.degree() > f.N - 1:
        raise TruncationError(f"degree {f.degree()} exceeds N - 1 = {f.N - 1}")
    T = cauchy_green_table(f.N)
    vec = f.flat(f.N - 1).reshape(f.m, -1)
    out = (T @ vec.T).T
    return DiscFunction.from_flat(out.reshape(-1), f.m, f.N)


@functools.lru_cache(maxsize=None)
def dbar_matrix(N):
    """Sparse d/dconj(zeta) from the degree N layout to the degree N-1 layout."""
    P, Q = monomials(N)
    pos = _flat_position(N - 1)
    keep = Q > 0
    rows = pos[P[keep], Q[keep] - 1]
    return sp.csr_matrix((Q[keep].astype(float), (rows, np.nonzero(keep)[0])),
                         shape=(monomial_count(N - 1), len(P)))


def cauchy_boundary(g, N=None):
    """Holomorphic extension sum_{k >= 0} g_hat(k) zeta^k of a boundary loop."""
    N = g.K if N is None else N
    pos = g.coeffs[:, g.K:]
    if pos.shape[1] > N + 1 and np.any(pos[:, N + 1:]):
        raise TruncationError("positive frequencies above the truncation degree")
    return DiscFunction.holomorphic(pos[:, : N + 1], N)


def estimate_t_norm(N, count=20, seed=0, g=None):
    """Observed sup-norm ratio ||T f|| / ||f|| over random band-limited f."""
    rng = np.random.default_rng(seed)
    g = g or grid(N, 2 * N + 2, 4 * N + 4)
    P, Q = monomials(N - 1)
    worst = 0.0
    for _ in range(count):
        decay = 1.0 / (1.0 + P + Q) ** 2
        vec = (rng.normal(size=len(P)) + 1j * rng.normal(size=len(P))) * decay
        f = DiscFunction.from_flat(vec, 1, N, N - 1)
        worst = max(worst, cauchy_green(f).sup_norm(g) / f.sup_norm(g))
    return worst
