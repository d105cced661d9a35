import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from jdisc import acs
from jdisc.errors import ConversionDomainError, TamingError


def random_a(rng, n, bound):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A * bound / acs.operator_norm(A)


def test_standard_structure_has_zero_a():
    for n in (1, 2, 3):
        J = acs.j_standard(n)
        assert np.allclose(J @ J, -np.eye(2 * n))
        assert np.allclose(acs.j_to_a(J), 0.0)


def test_a_to_j_squares_to_minus_identity():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4):
        J = acs.a_to_j(random_a(rng, n, 0.9))
        assert np.max(np.abs(J @ J + np.eye(2 * n))) < 1e-12


def test_round_trip_batched():
    rng = np.random.default_rng(1)
    A = np.stack([random_a(rng, 3, 0.95 * rng.random()) for _ in range(64)])
    assert np.max(np.abs(acs.j_to_a(acs.a_to_j(A)) - A)) < 1e-11


def test_complex_linear_part_is_multiplication_by_i():
    # J = J_st (I - Q)(I + Q)^{-1} with Q antilinear; check J on a vector against the closed form
    rng = np.random.default_rng(2)
    A = random_a(rng, 2, 0.5)
    J = acs.a_to_j(A)
    u = rng.normal(size=2) + 1j * rng.normal(size=2)
    x = u + A @ np.conj(u)  # x = (I + Q) u
    y = 1j * (u - A @ np.conj(u))  # J_st (I - Q) u
    assert np.allclose(J @ acs.to_real(x), acs.to_real(y))


def test_conversion_domain_error():
    A = np.array([[1.0]], dtype=complex)
    with pytest.raises(ConversionDomainError):
        acs.a_to_j(A)


def test_taming_matches_quadratic_form():
    rng = np.random.default_rng(3)
    for bound in (0.3, 0.8, 1.2, 2.0):
        A = random_a(rng, 2, bound)
        J = acs.a_to_j(A)
        positive = np.min(np.linalg.eigvalsh(acs.taming_form(J))) > 0
        assert positive == acs.is_tamed(A) == (bound < 1)


def test_calibrated_needs_symmetry():
    rng = np.random.default_rng(4)
    A = random_a(rng, 2, 0.5)
    S = 0.5 * (A + A.T)
    assert acs.is_calibrated(S)
    assert not acs.is_calibrated(A)
    # calibrated: the canonical metric is J-invariant
    J = acs.a_to_j(S)
    G = acs.metric_matrix(J)
    assert np.allclose(J.T @ G @ J, G, atol=1e-12)


def test_canonical_metric_rejects_untamed():
    A = np.array([[1.5]], dtype=complex)
    with pytest.raises(TamingError):
        acs.canonical_metric(acs.a_to_j(A), np.ones(2), np.ones(2))


def test_complex_frame_intertwines():
    rng = np.random.default_rng(5)
    J = acs.a_to_j(random_a(rng, 3, 0.7))
    F = acs.complex_frame(J)
    assert np.allclose(F @ acs.j_standard(3), J @ F)


entries = arrays(np.complex128, (2, 2), elements=st.complex_numbers(max_magnitude=1.0, allow_nan=False,
                                                                     allow_infinity=False))


@settings(max_examples=200, deadline=None)
@given(entries, st.floats(0.0, 0.99))
def test_round_trip_property(A, scale):
    norm = acs.operator_norm(A)
    A = A * (scale / norm) if norm > 0 else A
    J = acs.a_to_j(A)
    assert np.max(np.abs(J @ J + np.eye(4))) < 1e-10
    assert np.max(np.abs(acs.j_to_a(J) - A)) < 1e-10
