import numpy as np
import pytest

from jdisc.continuation import (HomotopyTrace, PushforwardField, anchor_normalization, block_rotation,
                                bubbling_diagnostic, certify, disc_normalization, is_symplectic, min_modulus,
                                mobius_disc, newton_correct, nonsqueezing_demo, pairwise_min_distance,
                                standard_disc, trace_family)
from jdisc.disc import DiscFunction
from jdisc.errors import BoundaryMismatchError, DemoSetupError, FieldConstructionError
from jdisc.fields import builtin_field
from jdisc.geometry import maslov_index, symplectic_area, windings
from jdisc.torus import TorusSpec


def test_standard_disc_certificate():
    p = np.array([1.0, np.exp(0.4j)])
    Z = standard_disc(p, 8)
    torus = TorusSpec(1.0, (1.0,))
    sol = certify(Z, builtin_field("zero"), torus, disc_normalization(p), expected_windings=(1, 0))
    assert sol.passed, sol.summary()
    cert = sol.certificate
    assert abs(cert["area"] - np.pi) < 1e-12
    assert cert["maslov"] == 0


def test_mobius_disc_anchor():
    a, b = 0.3 - 0.2j, [0.5j, 2.0]
    Z = mobius_disc(a, b, 2.0, 48)
    assert np.allclose(Z(np.zeros(1))[:, 0], [a, 0.5j, 2.0])
    assert abs(Z(np.ones(1))[0, 0] - np.sqrt(2.0)) < 1e-12
    torus = TorusSpec(2.0, (0.25, 4.0))
    assert anchor_normalization(a, b).residual(Z) < 1e-12
    assert np.max(np.abs(torus.defect(Z.boundary().samples(64)))) < 1e-10
    assert windings(Z) == (1, 0, 0)


def test_newton_recovers_disc_from_perturbation():
    p = np.array([1.0, 0.6 + 0.8j])
    torus = TorusSpec(1.0, (1.0,))
    Z0 = standard_disc(p, 12) + DiscFunction.from_terms(2, 12, {(0, 2, 0): 0.05, (1, 1, 1): 0.02j})
    Z, _, info = newton_correct(Z0, builtin_field("zero"), torus, disc_normalization(p))
    assert np.max(np.abs(Z.coeffs - standard_disc(p, 12).coeffs)) < 1e-12
    assert info["iterations"] <= 6


def test_trace_with_bump_field():
    field = builtin_field("bump", a0=0.3)
    tr = trace_family(field, np.array([1.0, 0.8 + 0.6j]), N=16, tol=1e-6)
    assert tr.complete and tr.passed
    assert tr.ts[-1] == 1.0
    assert np.all(np.diff(tr.ts) > 0)
    assert tr.final.certificate["windings"] == (1, 0)


def test_trace_rejects_point_off_torus():
    torus = TorusSpec(1.0, (1.0,))
    with pytest.raises(BoundaryMismatchError):
        trace_family(builtin_field("zero"), np.array([1.0, 0.5]), torus, N=8)


def test_trace_rejects_axis_violation():
    with pytest.raises(FieldConstructionError):
        trace_family(builtin_field("bump", r0=0.0), np.array([1.0, 1.0]), N=8)


def test_trace_rows_shape():
    tr = trace_family(builtin_field("zero"), np.array([1.0, 1.0j]), N=8)
    rows = tr.rows()
    assert len(rows) == len(tr)
    assert len(rows[0]) == len(tr.columns(2))
    assert isinstance(tr, HomotopyTrace)


def test_min_modulus_finds_interior_minimum():
    Z = DiscFunction.holomorphic(np.array([[0.0, 1.0], [0.3, 0.5]]), 4)  # w = 0.3 + zeta / 2
    assert abs(min_modulus(Z, [1])) < 1e-6


def test_maslov_index_of_multiply_wound_disc():
    Z = DiscFunction.holomorphic(np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]), 4)
    torus = TorusSpec(1.0, (1.0,))
    assert maslov_index(Z, torus) == 4
    assert maslov_index(Z, torus, absolute=True) == 6
    assert abs(symplectic_area(Z) - 3 * np.pi) < 1e-12


def test_bubbling_flags_concentrating_sequence():
    discs = [mobius_disc(a, [1.0], 1.0, 64) for a in (0.0, 0.4, 0.6, 0.75)]
    report = bubbling_diagnostic(discs)
    assert report["flagged"]
    assert report["kind"] == "boundary"
    steady = bubbling_diagnostic([standard_disc([1.0, 1.0], 8)] * 3)
    assert not steady["flagged"]


def test_pairwise_distance():
    a = np.zeros((3, 2))
    b = np.array([[3.0, 4.0], [10.0, 0.0]])
    d, pair = pairwise_min_distance([a, b])
    assert d == 5.0 and pair == (0, 1)


def test_rotation_is_symplectic_and_standard():
    S = block_rotation(2, 0.6)
    assert is_symplectic(S)
    field = PushforwardField(S, np.zeros(2), 1.0, 2.0)
    assert field.a0 < 1e-14


def test_squeeze_pushforward_is_tamed():
    S = np.diag([0.9, 1.0, 1 / 0.9, 1.0])
    field = PushforwardField(S, np.zeros(2), 1.0, 2.0)
    assert is_symplectic(S)
    assert 0 < field.a0 < 1


def test_nonsqueeze_rejects_non_symplectic():
    with pytest.raises(DemoSetupError):
        nonsqueezing_demo(np.diag([2.0, 1.0, 1.0, 1.0]), np.zeros(2), 0.5, 1.0)


def test_nonsqueeze_rejects_uncontained_ball():
    with pytest.raises(DemoSetupError):
        nonsqueezing_demo(np.eye(4), np.zeros(2), 1.2, 1.0)


def test_nonsqueeze_identity():
    rep = nonsqueezing_demo(np.eye(4), np.zeros(2), 0.5, 1.0, N=16)
    assert rep.verdict
    assert abs(rep.area - np.pi * 0.25) < 1e-6
