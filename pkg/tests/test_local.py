import numpy as np
import pytest

from jdisc import acs
from jdisc.disc import DiscFunction
from jdisc.errors import DivergenceError, ScaleError
from jdisc.fields import MatrixField, builtin_field
from jdisc.local import LocalProblem, anchored_green, local_family, normalize_chart, solve_local


def test_anchored_green_fixes_value_and_direction():
    rng = np.random.default_rng(0)
    N = 10
    c = rng.normal(size=(2, N + 1, N + 1)) + 1j * rng.normal(size=(2, N + 1, N + 1))
    P, Q = np.indices((N + 1, N + 1))
    g = DiscFunction(np.where(P + Q <= N - 1, c, 0.0))
    R = anchored_green(g)
    zero = np.zeros(1)
    assert np.max(np.abs(R(zero))) < 1e-14
    assert np.max(np.abs(R.dxi()(zero))) < 1e-13
    assert np.max(np.abs(R.dbar().coeffs - g.coeffs)) < 1e-13


def test_zero_field_gives_affine_disc():
    field = builtin_field("zero", n=2)
    p = np.array([0.2, 1.0j])
    v = np.array([1.0, 0.5])
    sol = solve_local(LocalProblem(field, DiscFunction.zeros(2, 8), p, v))
    assert sol.passed
    assert np.allclose(sol.Z(np.array([0.5]))[:, 0], p + 0.5 * v)


def test_bump_field_converges_with_certificate():
    field = builtin_field("bump", a0=0.3)
    p = np.array([0.5, 1.0 + 0.2j])
    v = np.array([0.6, 0.3j])
    sol = solve_local(LocalProblem(field, DiscFunction.zeros(2, 16), p, v), tol=1e-10)
    assert sol.passed, sol.summary()
    assert sol.certificate["cr_residual"] <= 1e-10
    assert sol.info["iterations"] <= 40


def test_holomorphic_data_problem():
    field = builtin_field("bump", a0=0.3)
    W = DiscFunction.holomorphic(np.array([[0.2, 0.3], [1.0, 0.2j]]), 16)
    sol = solve_local(LocalProblem(field, W), tol=1e-10)
    assert sol.passed, sol.summary()


def test_chart_normalisation_reduces_norm():
    field = builtin_field("bump", a0=0.8)
    p = np.array([0.3, 1.0])
    chart = normalize_chart(field, p, 0.3)
    assert chart.a0 <= 0.3
    # J(p) is standard in the chart
    assert np.max(np.abs(chart(np.zeros((2, 1))))) < 1e-12
    U = np.array([[0.1 + 0.2j], [-0.3j]])
    assert np.allclose(chart.to_chart(chart.to_original(U)), U)


def test_chart_derivatives_match_differences():
    field = builtin_field("bump", a0=0.6)
    chart = normalize_chart(field, np.array([0.3, 1.0]), 0.3)
    U = np.array([[0.2 + 0.1j], [0.1 - 0.3j]])
    Dz, Db = chart.derivatives(U)
    h = 1e-6
    for k in range(2):
        dU = np.zeros_like(U)
        dU[k] = h
        fd = (chart(U + dU) - chart(U - dU)) / (2 * h)
        assert np.allclose(fd, Dz[:, :, k] + Db[:, :, k], atol=1e-7)


def test_chart_solve_pulls_back():
    field = builtin_field("bump", a0=0.8)
    p = np.array([0.3, 1.0])
    sol = solve_local(LocalProblem(field, DiscFunction.zeros(2, 16), p, np.array([1.0, 0.0]), 0.25),
                      use_chart=True)
    assert sol.certificate["anchor_error"] < 1e-12
    assert sol.certificate["cr_residual"] < 1e-8


def test_scale_error_when_dilation_fails():
    field = builtin_field("bump", a0=0.8)
    with pytest.raises(ScaleError):
        normalize_chart(field, np.array([0.3, 1.0]), 0.3, max_halvings=0)


class LinearField(MatrixField):
    """Scalar A(z) = c z; far from tamed on large discs, which lets Picard iteration blow up."""

    n = 1

    def __init__(self, c):
        self.c = c

    def evaluate(self, Z):
        return (self.c * Z)[None]

    def derivatives(self, Z):
        Dz = np.full((1, 1, 1) + Z.shape[1:], self.c, dtype=complex)
        return Dz, np.zeros_like(Dz)


def test_divergence_is_detected():
    W = DiscFunction.holomorphic(np.array([[0.5, 2.0, 1.0]]), 12)
    with pytest.raises(DivergenceError):
        solve_local(LocalProblem(LinearField(2.0), W), newton_switch=10.0)


def test_local_family_is_continuous():
    field = builtin_field("bump", a0=0.3)
    base, sols, constant = local_family(field, np.array([0.5, 1.0]), np.array([0.5, 0.0]), 0.05, count=4)
    assert all(s.passed for s in sols)
    assert constant < 10.0


def test_calibrated_energy_equals_area():
    from jdisc.geometry import energy, interior_area

    field = builtin_field("calibrated", a0=0.5, seed=3)
    sol = solve_local(LocalProblem(field, DiscFunction.zeros(2, 16), np.array([0.9, 1.0j]),
                                   np.array([0.2, 0.1])))
    A = field(sol.Z(np.array([0.5])))[:, :, 0]
    assert acs.is_calibrated(A)
    assert abs(energy(sol.Z, field) - interior_area(sol.Z)) < 1e-10
