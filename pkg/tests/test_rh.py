import numpy as np
import pytest

from jdisc.disc import DiscFunction
from jdisc.errors import LopatinskiError, ObstructionError
from jdisc.rh import (BoundaryMatrix, LinearRHProblem, apply_L, dbar_distance_witness, fredholm_index,
                      kernel_cokernel, point_constraints, solve_linear_rh)
from oracles import chebyshev_distance_cvxpy, scalar_kernel_dimensions


def boundary_samples(M):
    return 2 * np.pi * np.arange(M) / M


def test_identity_boundary_with_cosine_data():
    # Re f = cos(theta) - 1 with f holomorphic and f(1) = 0 gives f = zeta - 1
    N, M = 8, 64
    th = boundary_samples(M)
    prob = LinearRHProblem(BoundaryMatrix.identity(1), DiscFunction.zeros(1, N), (np.cos(th) - 1)[None],
                           point_constraints(0, 1.0, 0.0))
    sol = solve_linear_rh(prob)
    zeta = np.array([0.3 + 0.2j, -0.6j])
    assert np.allclose(sol.f(zeta)[0], zeta - 1)
    assert sol.residual < 1e-12


def test_solution_satisfies_interior_and_boundary():
    rng = np.random.default_rng(0)
    N, M = 10, 96
    c = rng.normal(size=(2, N + 1, N + 1)) + 1j * rng.normal(size=(2, N + 1, N + 1))
    P_, Q_ = np.indices((N + 1, N + 1))
    h = DiscFunction(np.where(P_ + Q_ <= N - 1, c, 0.0))
    P = BoundaryMatrix.identity(2)
    th = boundary_samples(M)
    g = np.array([np.cos(th), np.sin(2 * th)])
    cons = point_constraints(0, 0.0, 0.0)[1:] + point_constraints(1, 0.0, 0.0)[1:]
    sol = solve_linear_rh(LinearRHProblem(P, h, g, cons))
    d, b = apply_L(P, sol.f, M)
    assert np.max(np.abs(d.coeffs - h.coeffs)) < 1e-10
    assert np.max(np.abs(b - g)) < 1e-9


def test_constraints_hold_exactly():
    N, M = 8, 64
    P = BoundaryMatrix.diagonal([np.array([1.0]), np.array([0.5j])])
    g = np.zeros((2, M))
    cons = point_constraints(0, 0.2, 0.3 + 0.1j)
    sol = solve_linear_rh(LinearRHProblem(P, DiscFunction.zeros(2, N), g, cons), raise_on_obstruction=False)
    assert abs(sol.f(np.array([0.2]))[0, 0] - (0.3 + 0.1j)) < 1e-13


def test_obstruction_is_reported():
    # Re(zeta f) = 1 has no holomorphic solution: the constant Fourier mode cannot be matched
    N, M = 8, 64
    prob = LinearRHProblem(BoundaryMatrix.monomial(1), DiscFunction.zeros(1, N), np.ones((1, M)))
    with pytest.raises(ObstructionError) as info:
        solve_linear_rh(prob)
    assert info.value.residual > 0.5


def test_lopatinski_violation():
    P = BoundaryMatrix(np.array([0.5, 1.0, 0.5]))  # 1 + cos(theta) vanishes at theta = pi
    with pytest.raises(LopatinskiError):
        fredholm_index(P, N=8)


@pytest.mark.parametrize("k", [-3, -1, 0, 1, 2])
def test_scalar_index_against_rank_oracle(k):
    rep = fredholm_index(BoundaryMatrix.monomial(k), 0, N=20)
    assert rep.index == rep.formula_index == 1 - 2 * k
    assert (rep.kernel, rep.cokernel) == scalar_kernel_dimensions(k, 20)


def test_kernel_cokernel_diagonal():
    P = BoundaryMatrix.diagonal([BoundaryMatrix.monomial(-1).coeffs[0, 0], np.array([1.0])])
    assert kernel_cokernel(P, 16) == (4, 0)


def test_witness_matches_socp_oracle():
    for N in (0, 3, 8):
        assert abs(dbar_distance_witness(N) - chebyshev_distance_cvxpy(N, 8 * (N + 2))) < 1e-6


def test_witness_is_one():
    assert abs(dbar_distance_witness(12) - 1.0) < 1e-9
