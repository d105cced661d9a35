"""Matrix fields Z -> A(Z) defining almost complex structures on C^n.

A field is evaluated on arrays of points laid out component-first: ``Z`` has
shape ``(n, *S)`` and ``field(Z)`` returns ``(n, n, *S)``.  Derivatives are
Wirtinger derivatives ``dA/dZ_k`` and ``dA/dconj(Z_k)`` stacked as
``(n, n, n, *S)`` with the differentiation index last among the first three.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import acs
from .errors import FieldConstructionError


def _h(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _dh(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos]) / x[pos] ** 2
    return out


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a, b = _h(x), _h(1.0 - x)
    return a / (a + b)


def smooth_step_deriv(x):
    x = np.asarray(x, dtype=float)
    a, b = _h(x), _h(1.0 - x)
    da, db = _dh(x), _dh(1.0 - x)
    return (da * b + a * db) / (a + b) ** 2


class MatrixField:
    """Base class.  Subclasses implement ``evaluate`` and ``derivatives``."""

    n = 0
    a0 = 0.0
    r0 = 0.0
    lipschitz = 0.0
    name = "field"

    def __call__(self, Z):
        return self.evaluate(np.asarray(Z, dtype=complex))

    def evaluate(self, Z):
        raise NotImplementedError

    def derivatives(self, Z):
        raise NotImplementedError

    def directional(self, Z, dZ):
        """dA at Z applied to the tangent displacement dZ (same layout as Z)."""
        Dz, Db = self.derivatives(np.asarray(Z, dtype=complex))
        dZ = np.asarray(dZ, dtype=complex)
        return np.einsum("ijk...,k...->ij...", Dz, dZ) + np.einsum(
            "ijk...,k...->ij...", Db, np.conj(dZ)
        )

    def scaled(self, t):
        return ScaledField(self, float(t))

    def describe(self):
        return {"kind": self.name, "n": self.n, "a0": self.a0, "r0": self.r0}


class ZeroField(MatrixField):
    name = "zero"

    def __init__(self, n):
        self.n = int(n)

    def evaluate(self, Z):
        return np.zeros((self.n, self.n) + Z.shape[1:], dtype=complex)

    def derivatives(self, Z):
        shape = (self.n, self.n, self.n) + Z.shape[1:]
        return np.zeros(shape, dtype=complex), np.zeros(shape, dtype=complex)


class ScaledField(MatrixField):
    """t * A; the structure family J_t of the continuity method."""

    def __init__(self, base, t):
        self.base = base
        self.t = t
        self.n = base.n
        self.a0 = abs(t) * base.a0
        self.r0 = base.r0
        self.lipschitz = abs(t) * base.lipschitz
        self.name = base.name

    def evaluate(self, Z):
        if self.t == 0.0:
            return np.zeros((self.n, self.n) + Z.shape[1:], dtype=complex)
        return self.t * self.base.evaluate(Z)

    def derivatives(self, Z):
        Dz, Db = self.base.derivatives(Z)
        return self.t * Dz, self.t * Db

    def scaled(self, t):
        return ScaledField(self.base, self.t * float(t))

    def describe(self):
        d = self.base.describe()
        d["scale"] = self.t
        return d


@dataclass(frozen=True)
class AffinePattern:
    """P(Z) = M0 + sum_k (Mz[k] Z_k + Mb[k] conj(Z_k))."""

    M0: np.ndarray
    Mz: np.ndarray = dc_field(default=None)
    Mb: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        n = self.M0.shape[0]
        if self.Mz is None:
            object.__setattr__(self, "Mz", np.zeros((n, n, n), dtype=complex))
        if self.Mb is None:
            object.__setattr__(self, "Mb", np.zeros((n, n, n), dtype=complex))

    def __call__(self, Z):
        out = self.M0.reshape(self.M0.shape + (1,) * (Z.ndim - 1)).astype(complex)
        out = out + np.einsum("ijk,k...->ij...", self.Mz, Z)
        return out + np.einsum("ijk,k...->ij...", self.Mb, np.conj(Z))

    def bound(self, radii):
        """Upper bound of the operator norm when |Z_k| <= radii[k]."""
        norm = lambda M: np.linalg.norm(M, 2)
        total = norm(self.M0)
        for k, rad in enumerate(radii):
            total += rad * (norm(self.Mz[:, :, k]) + norm(self.Mb[:, :, k]))
        return float(total)

    def is_zero(self):
        return not (np.any(self.M0) or np.any(self.Mz) or np.any(self.Mb))

    def masked(self, mask):
        m = np.asarray(mask, dtype=float)
        return AffinePattern(self.M0 * m, self.Mz * m[:, :, None], self.Mb * m[:, :, None])

    def symmetrized(self):
        sym = lambda M: 0.5 * (M + np.swapaxes(M, 0, 1))
        return AffinePattern(sym(self.M0), sym(self.Mz), sym(self.Mb))


class CutoffPolynomialField(MatrixField):
    """A(Z) = scale * chi(Z) * (sigma(Z) P1(Z) + P2(Z)).

    ``chi`` is a plateau cutoff equal to 1 where ``|G (Z - c)| <= rho_in``
    and 0 where ``|G (Z - c)| >= rho_out``.  ``sigma`` is the product over
    ``w_j`` (components 2..n) of a step vanishing for ``|w_j| <= 2 r0`` and
    equal to 1 for ``|w_j| >= 4 r0``; it is identically 1 when ``r0 == 0``.
    """

    def __init__(self, n, scale, P1, P2=None, center=None, rho_in=2.0, rho_out=3.0,
                 r0=0.0, metric=None, a0=None, name="bump"):
        self.n = int(n)
        self.scale = float(scale)
        self.P1 = P1
        self.P2 = P2 if P2 is not None else AffinePattern(np.zeros((n, n), dtype=complex))
        self.center = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
        if not 0 < rho_in < rho_out:
            raise FieldConstructionError("cutoff radii must satisfy 0 < rho_in < rho_out")
        self.rho_in = float(rho_in)
        self.rho_out = float(rho_out)
        self.r0 = float(r0)
        self.G = np.eye(2 * n) if metric is None else np.asarray(metric, dtype=float)
        self.name = name
        # support rule: A = 0 whenever some |w_j| < 2 r0
        self.supported = self.r0 > 0 and self.P2.is_zero()
        Ginv_norm = np.linalg.norm(np.linalg.inv(self.G), 2)
        radii = np.abs(self.center) + self.rho_out * Ginv_norm
        bound = self.scale * (self.P1.bound(radii) + self.P2.bound(radii))
        self.a0 = float(bound if a0 is None else a0)
        if self.a0 >= 1.0 or bound > self.a0 * (1 + 1e-12):
            raise FieldConstructionError(
                f"taming bound violated: sup ||A|| may reach {bound:.4g} (a0 = {self.a0:.4g})"
            )
        self.lipschitz = estimate_lipschitz(self)

    # --- scalar profiles -------------------------------------------------
    def _ball(self, Z):
        x = acs.to_real(np.moveaxis(Z - self.center.reshape((-1,) + (1,) * (Z.ndim - 1)), 0, -1))
        Gx = x @ self.G.T
        s = np.sum(Gx * Gx, axis=-1)
        width = self.rho_out**2 - self.rho_in**2
        arg = (self.rho_out**2 - s) / width
        chi = smooth_step(arg)
        # real gradient of s is 2 G^T G x; Wirtinger d/dZ = (d/dx - i d/dy) / 2
        grad = 2.0 * Gx @ self.G
        dchi_real = -smooth_step_deriv(arg)[..., None] * grad / width
        dchi = 0.5 * (dchi_real[..., : self.n] - 1j * dchi_real[..., self.n:])
        return chi, np.moveaxis(dchi, -1, 0)

    def _sigma(self, Z):
        shape = Z.shape[1:]
        sigma = np.ones(shape)
        dsigma = np.zeros((self.n,) + shape, dtype=complex)
        if self.r0 <= 0.0 or self.n < 2:
            return sigma, dsigma
        lo, hi = (2 * self.r0) ** 2, (4 * self.r0) ** 2
        steps, dsteps = [], []
        for j in range(1, self.n):
            arg = (np.abs(Z[j]) ** 2 - lo) / (hi - lo)
            steps.append(smooth_step(arg))
            dsteps.append(smooth_step_deriv(arg) * np.conj(Z[j]) / (hi - lo))
        for j in range(1, self.n):
            others = np.ones(shape)
            for i in range(1, self.n):
                if i != j:
                    others = others * steps[i - 1]
            sigma = sigma * steps[j - 1]
            dsigma[j] = dsteps[j - 1] * others
        return sigma, dsigma

    def evaluate(self, Z):
        chi, _ = self._ball(Z)
        sigma, _ = self._sigma(Z)
        return self.scale * chi * (sigma * self.P1(Z) + self.P2(Z))

    def derivatives(self, Z):
        chi, dchi = self._ball(Z)
        sigma, dsigma = self._sigma(Z)
        P1, P2 = self.P1(Z), self.P2(Z)
        core = sigma * P1 + P2
        ext = (slice(None),) * 2 + (None,)
        Dz = dchi[None, None] * core[ext] + chi * (
            dsigma[None, None] * P1[ext]
            + sigma * _expand(self.P1.Mz, Z)
            + _expand(self.P2.Mz, Z)
        )
        Db = np.conj(dchi)[None, None] * core[ext] + chi * (
            np.conj(dsigma)[None, None] * P1[ext]
            + sigma * _expand(self.P1.Mb, Z)
            + _expand(self.P2.Mb, Z)
        )
        return self.scale * Dz, self.scale * Db

    def describe(self):
        d = super().describe()
        d.update(rho_in=self.rho_in, rho_out=self.rho_out, lipschitz=self.lipschitz)
        return d


def _expand(M, Z):
    return np.broadcast_to(M.reshape(M.shape + (1,) * (Z.ndim - 1)), M.shape + Z.shape[1:])


def sample_ball(n, radius, count, rng, center=None):
    """Uniform samples from the ball of C^n, shape (n, count)."""
    x = rng.normal(size=(count, 2 * n))
    x /= np.linalg.norm(x, axis=1)[:, None]
    x *= radius * rng.random(count)[:, None] ** (1.0 / (2 * n))
    Z = acs.to_complex(x).T
    if center is not None:
        Z = Z + np.asarray(center, dtype=complex)[:, None]
    return Z


def derivative_bound(field, Z):
    """Pointwise bound of the real derivative of A in operator norm."""
    Dz, Db = field.derivatives(Z)
    per_k = np.linalg.norm(Dz, axis=(0, 1)) + np.linalg.norm(Db, axis=(0, 1))
    return np.sqrt(np.sum(per_k**2, axis=0))


def estimate_lipschitz(field, count=20000, seed=0, safety=1.25):
    """Sampled Lipschitz constant of Z -> A(Z), inflated by ``safety``."""
    rng = np.random.default_rng(seed)
    radius = getattr(field, "rho_out", 2.0) * 1.05
    center = getattr(field, "center", None)
    Z = sample_ball(field.n, radius, count, rng, center)
    return safety * float(np.max(derivative_bound(field, Z)))


def _pattern(n, seed, linear=0.15):
    rng = np.random.default_rng(seed)
    cn = lambda *shape: rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return AffinePattern(cn(n, n), linear * cn(n, n, n), linear * cn(n, n, n))


def builtin_field(kind, n=2, a0=0.5, r0=0.1, center=None, rho_in=2.0, rho_out=3.0, seed=7,
                  linear=0.05):
    """Instantiate one of the built-in matrix fields.

    kinds
        ``zero``             A = 0.
        ``bump``             full affine pattern times plateau cutoff, vanishing
                             for ``|w_j| < 2 r0``.
        ``lower_triangular`` n = 2; entries (a, b) of the first column carry the
                             ``w``-cutoff so a(z, 0) = b(z, 0) = 0; d = 0.
        ``calibrated``       symmetric pattern (calibrated structures).

    The pattern is normalised so that sup ||A|| <= a0 holds by construction.
    """
    if kind == "zero":
        return ZeroField(n)
    if not 0.0 <= a0 < 1.0:
        raise FieldConstructionError(f"taming bound a0 = {a0} must lie in [0, 1)")
    if r0 < 0.0:
        raise FieldConstructionError("support radius r0 must be non-negative")
    pattern = _pattern(n, seed, linear)
    P2 = None
    if kind == "bump":
        P1 = pattern
    elif kind == "calibrated":
        P1 = pattern.symmetrized()
    elif kind == "lower_triangular":
        if n != 2:
            raise FieldConstructionError("lower_triangular fields are defined for n = 2")
        if r0 <= 0.0:
            raise FieldConstructionError("lower_triangular fields need r0 > 0")
        P1 = pattern.masked([[1, 0], [1, 0]])
        P2 = pattern.masked([[0, 0], [0, 1]])
    else:
        raise FieldConstructionError(f"unknown field kind {kind!r}")
    center_arr = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    radii = np.abs(center_arr) + rho_out
    raw = P1.bound(radii) + (P2.bound(radii) if P2 is not None else 0.0)
    scale = a0 / raw if raw > 0 else 0.0
    return CutoffPolynomialField(n, scale, P1, P2, center_arr, rho_in, rho_out, r0, a0=a0, name=kind)


def check_field(field, count=2000, seed=1, h=1e-5, tol=1e-10):
    """Sampled invariant suite for a matrix field.

    Returns a dict of named checks, each ``(passed, measured value)``.
    """
    rng = np.random.default_rng(seed)
    radius = getattr(field, "rho_out", 2.0) * 1.05
    Z = sample_ball(field.n, radius, count, rng, getattr(field, "center", None))
    A = field(Z)
    norms = acs.operator_norm(np.moveaxis(A, (0, 1), (-2, -1)))
    report = {"taming": (bool(np.max(norms) <= field.a0 + tol and field.a0 < 1), float(np.max(norms)))}
    if getattr(field, "supported", False) and field.n > 1:
        near = sample_ball(field.n, radius, count, rng, getattr(field, "center", None))
        j = rng.integers(1, field.n, size=count)
        scale = 2 * field.r0 * rng.random(count) * 0.999
        near[j, np.arange(count)] = scale * np.exp(2j * np.pi * rng.random(count))
        leak = float(np.max(np.abs(field(near)), initial=0.0))
        report["support"] = (leak == 0.0, leak)
    if field.name == "lower_triangular":
        axis = Z.copy()
        axis[1] = 0.0
        col = field(axis)[:, 0]
        leak = float(np.max(np.abs(col)))
        report["axis"] = (leak == 0.0, leak)
    Dz, Db = field.derivatives(Z)
    errs = []
    for step in (h, h / 2):
        worst = 0.0
        for k in range(field.n):
            for direction in (1.0, 1j):
                dZ = np.zeros_like(Z)
                dZ[k] = direction * step
                fd = (field(Z + dZ) - field(Z - dZ)) / (2 * step)
                an = Dz[:, :, k] * direction + Db[:, :, k] * np.conj(direction)
                worst = max(worst, float(np.max(np.abs(fd - an))))
        errs.append(worst)
    report["derivative"] = (errs[1] <= max(1e-6, 0.3 * errs[0] + 1e-9), errs[1])
    lip = float(np.max(derivative_bound(field, Z)))
    report["lipschitz"] = (lip <= field.lipschitz * (1 + 1e-9) + 1e-12 or lip <= 1e-12, lip)
    return report
