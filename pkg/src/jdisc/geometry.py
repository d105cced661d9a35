"""Topological and metric quantities of discs: winding, area, energy, Maslov index."""

import numpy as np

from . import acs
from .disc import BoundaryLoop
from .errors import BoundaryMismatchError, DegeneracyError, ImmersionError, TamingError


def disc_quadrature(nr, nt):
    """Nodes and weights on the unit disc: Gauss-Legendre in r (weight r dr), trapezoid in theta.

    Exact for polynomials in zeta, conj(zeta) of degree <= min(2 nr - 2, nt - 1).
    """
    x, w = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w * r
    theta = 2 * np.pi * np.arange(nt) / nt
    zeta = r[:, None] * np.exp(1j * theta)[None, :]
    weights = wr[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]
    return zeta, weights


def _default_quadrature(Z, nr=None, nt=None):
    return disc_quadrature(nr or Z.N + 4, nt or 4 * Z.N + 8)


def winding_of_samples(values, threshold=1e-8):
    """Winding number of one sampled closed loop (values at equispaced angles)."""
    values = np.asarray(values, dtype=complex)
    if np.min(np.abs(values)) <= threshold:
        raise DegeneracyError(
            f"loop comes within {np.min(np.abs(values)):.3g} of the origin (threshold {threshold:.3g})"
        )
    steps = np.angle(np.roll(values, -1) / values)
    return float(np.sum(steps) / (2 * np.pi)), float(np.max(np.abs(steps)))


def winding_number(loop, component=0, threshold=1e-8, M=None, max_doublings=8):
    """Winding number of a component of a boundary loop about 0.

    The loop is sampled until every angular increment is below pi/4 and the
    rounded count agrees between M and 2M samples.
    """
    if not isinstance(loop, BoundaryLoop):
        loop = loop.boundary()
    M = M or loop.M
    previous = None
    for _ in range(max_doublings + 1):
        total, biggest = winding_of_samples(loop.samples(M)[component], threshold)
        count = int(np.rint(total))
        if biggest < np.pi / 4 and abs(total - count) < 1e-6:
            if previous == count:
                return count
            previous = count
        else:
            previous = None
        M *= 2
    raise DegeneracyError("winding number did not stabilise under refinement")


def windings(Z, threshold=1e-8):
    loop = Z.boundary()
    return tuple(winding_number(loop, j, threshold) for j in range(Z.m))


def symplectic_area(Z, M=None):
    """Boundary integral of Z^* lambda, lambda = sum_j (x_j dy_j - y_j dx_j) / 2.

    Trapezoid quadrature on M >= 2N + 1 angles is exact for the polynomial trace.
    """
    loop = Z.boundary()
    M = M or max(4 * Z.N, 8)
    z = loop.samples(M)
    dz = loop.derivative().samples(M)
    return float(0.5 * np.sum(np.imag(np.conj(z) * dz)) * 2 * np.pi / M)


def area_density(Z, zeta):
    """Pullback density of omega: sum_j |d z_j/d zeta|^2 - |d z_j/d conj(zeta)|^2."""
    return np.sum(np.abs(Z.dz()(zeta)) ** 2 - np.abs(Z.dbar()(zeta)) ** 2, axis=0)


def interior_area(Z, nr=None, nt=None):
    """Area integral of Z^* omega over the disc by tensor quadrature."""
    zeta, w = _default_quadrature(Z, nr, nt)
    return float(np.sum(area_density(Z, zeta) * w))


def _real_derivatives(Z, zeta):
    dz, db = Z.dz()(zeta), Z.dbar()(zeta)
    xi = np.moveaxis(dz + db, 0, -1)
    eta = np.moveaxis(1j * (dz - db), 0, -1)
    return acs.to_real(xi), acs.to_real(eta)


def metric_at(field, Zvals):
    """Canonical metric matrices at points Zvals (n, ...) -> (..., 2n, 2n)."""
    A = np.moveaxis(field(Zvals), (0, 1), (-2, -1))
    J = acs.a_to_j(A)
    G = acs.taming_form(J)
    if np.min(np.linalg.eigvalsh(G)) <= 0.0:
        raise TamingError("structure not tamed along the disc")
    return G


def energy_density(Z, zeta, field=None):
    u, v = _real_derivatives(Z, zeta)
    if field is None:
        return 0.5 * (np.sum(u * u, axis=-1) + np.sum(v * v, axis=-1))
    G = metric_at(field, Z(zeta))
    quad = lambda x: np.einsum("...i,...ij,...j->...", x, G, x)
    return 0.5 * (quad(u) + quad(v))


def energy(Z, field=None, nr=None, nt=None):
    """Half the integral of |Z_xi|_g^2 + |Z_eta|_g^2 for the canonical metric of J_A.

    ``field=None`` means the standard structure (Euclidean metric).
    """
    zeta, w = _default_quadrature(Z, nr, nt)
    return float(np.sum(energy_density(Z, zeta, field) * w))


def boundary_defect(Z, torus, M=None):
    vals = Z.boundary().samples(M or max(8 * Z.N, 16))
    return float(np.max(np.abs(torus.defect(vals))))


def maslov_index(Z, torus, tol=1e-6, absolute=False):
    """Maslov index of a disc with boundary on a product torus.

    The loop of tangent planes of the torus along the boundary is
    diag(i z_j / |z_j|) R^n; its Maslov index is twice the sum of the
    component winding numbers.  By default the value is reported relative to
    the reference disc zeta -> (zeta, c), which therefore has index 0.
    """
    if Z.m != torus.n:
        raise BoundaryMismatchError("disc and torus dimensions differ")
    defect = boundary_defect(Z, torus)
    if defect > tol * max(1.0, float(np.max(torus.squared()))):
        raise BoundaryMismatchError(f"boundary leaves the torus by {defect:.3g}")
    total = 2 * sum(windings(Z))
    return total if absolute else total - 2


def surface_integrals(Fu, Fv, weights, J=None, rel_tol=1e-12):
    """(vol_g, integral of omega) for a sampled parametrised surface.

    Fu, Fv are real tangent vectors (..., 2n) at the quadrature nodes.
    """
    Fu = np.asarray(Fu, dtype=float)
    Fv = np.asarray(Fv, dtype=float)
    dim = Fu.shape[-1]
    if J is None:
        J = acs.j_standard(dim // 2)
    G = acs.taming_form(np.asarray(J, dtype=float))
    if np.min(np.linalg.eigvalsh(G)) <= 0.0:
        raise TamingError("structure is not tamed")
    E = np.einsum("...i,...ij,...j->...", Fu, G, Fu)
    F = np.einsum("...i,...ij,...j->...", Fu, G, Fv)
    Gv = np.einsum("...i,...ij,...j->...", Fv, G, Fv)
    det = E * Gv - F * F
    scale = np.maximum(E * Gv, np.finfo(float).tiny)
    if np.any(det <= rel_tol * scale):
        raise ImmersionError("parametrisation degenerates at some sample")
    vol = np.sum(np.sqrt(det) * weights)
    om = np.sum(acs.omega(Fu, Fv) * weights)
    return float(vol), float(om)


def wirtinger_gap(Fu, Fv, weights, J=None):
    """vol_g(surface) - integral of omega; >= 0, zero iff the tangent planes are J-complex."""
    vol, om = surface_integrals(Fu, Fv, weights, J)
    return vol - om


def disc_surface(Z, nr=None, nt=None):
    """Tangent data (Z_xi, Z_eta) and weights of a disc at quadrature nodes."""
    zeta, w = _default_quadrature(Z, nr, nt)
    u, v = _real_derivatives(Z, zeta)
    return u, v, w
