"""Acceptance criteria 1-13; each test prints one PASS/FAIL line (also shown in the summary)."""

import json
import time

import numpy as np
import pytest

from acceptance_log import verdict
from jdisc import acs
from jdisc.cli import main
from jdisc.continuation import (block_rotation, default_eta, nonsqueezing_demo, solve_higher_dim, standard_disc,
                                sweep_foliation, trace_family)
from jdisc.disc import DiscFunction, cauchy_green
from jdisc.fields import builtin_field
from jdisc.geometry import energy, interior_area, symplectic_area
from jdisc.local import LocalProblem, solve_local
from jdisc.rh import BoundaryMatrix, dbar_distance_witness, fredholm_index, point_constraints
from jdisc.torus import TorusSpec
from oracles import cauchy_green_weights, sampled_taming, scalar_kernel_dimensions


def check(*args, **kwargs):
    ok, line = verdict(*args, **kwargs)
    assert ok, line


def test_criterion_01_standard_structure_exact():
    q = 0.6 + 0.8j
    p = np.array([1.0, q])
    start = time.perf_counter()
    tr = trace_family(builtin_field("zero"), p, N=16, tol=1e-12)
    elapsed = time.perf_counter() - start
    exact = standard_disc(p, 16)
    dev = max(np.max(np.abs(s.Z.coeffs - exact.coeffs)) for s in tr.solutions)
    cr = max(s.certificate["cr_residual"] for s in tr.solutions)
    bd = max(s.certificate["boundary_residual"] for s in tr.solutions)
    area = max(abs(s.certificate["area"] - np.pi) for s in tr.solutions)
    ok = tr.complete and tr.ts[-1] == 1.0 and dev <= 1e-12 and cr <= 1e-12 and bd <= 1e-12 and area <= 1e-10
    check(1, "A = 0 trace reproduces (zeta, q)", ok,
          f"{len(tr)} discs, max dev {dev:.1e}, cr {cr:.1e}, boundary {bd:.1e}, |area - pi| {area:.1e}",
          elapsed, 1.0)


def test_criterion_02_cauchy_green_contract():
    rng = np.random.default_rng(2)
    N = 32
    P, Q = np.indices((N + 1, N + 1))
    points = np.sqrt(rng.uniform(0, 0.9, 16)) * np.exp(2j * np.pi * rng.random(16))
    start = time.perf_counter()
    weights = [cauchy_green_weights(z0, N) for z0 in points]
    worst_dbar, worst_quad = 0.0, 0.0
    for _ in range(100):
        c = rng.normal(size=(1, N + 1, N + 1)) + 1j * rng.normal(size=(1, N + 1, N + 1))
        f = DiscFunction(np.where(P + Q <= N - 1, c, 0.0))
        Tf = cauchy_green(f)
        worst_dbar = max(worst_dbar, float(np.max(np.abs(Tf.dbar().coeffs - f.coeffs))))
        vals = Tf(points)[0]
        ref = np.array([np.sum(f.coeffs[0] * w) for w in weights])
        worst_quad = max(worst_quad, float(np.max(np.abs(vals - ref))))
    elapsed = time.perf_counter() - start
    check(2, "dbar T f = f and T matches polar quadrature", worst_dbar <= 1e-12 and worst_quad <= 1e-8,
          f"coefficient error {worst_dbar:.1e}, quadrature gap {worst_quad:.1e} at 16 points", elapsed, 10.0)


def test_criterion_03_round_trip():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst_a, worst_j = 0.0, 0.0
    for n in (1, 2, 3, 4):
        A = rng.normal(size=(250, n, n)) + 1j * rng.normal(size=(250, n, n))
        A *= (0.95 * rng.random(250) / acs.operator_norm(A))[:, None, None]
        J = acs.a_to_j(A)
        worst_a = max(worst_a, float(np.max(np.abs(acs.j_to_a(J) - A))))
        worst_j = max(worst_j, float(np.max(np.abs(J @ J + np.eye(2 * n)))))
    elapsed = time.perf_counter() - start
    check(3, "J <-> A round trip", worst_a <= 1e-10 and worst_j <= 1e-10,
          f"1000 samples, |A' - A| {worst_a:.1e}, |J^2 + I| {worst_j:.1e}", elapsed, 5.0)


def test_criterion_04_taming_equivalence():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    disagreements = 0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        norm = rng.uniform(0.0, 0.95) if rng.random() < 0.5 else rng.uniform(1.05, 2.0)
        A *= norm / acs.operator_norm(A)
        u = rng.normal(size=(512, 2 * n))
        u /= np.linalg.norm(u, axis=1)[:, None]
        sampled = sampled_taming(acs.a_to_j(A), u) > 0
        disagreements += sampled != acs.is_tamed(A)
    elapsed = time.perf_counter() - start
    check(4, "is_tamed agrees with sampled omega(u, Ju) > 0", disagreements == 0,
          f"{disagreements} disagreements over 200 x 512", elapsed, 10.0)


def test_criterion_05_local_solver():
    a0 = 0.3
    field = builtin_field("bump", a0=a0)
    problem = LocalProblem(field, DiscFunction.zeros(2, 16), np.array([0.5, 1.0 + 0.2j]), np.array([0.6, 0.3j]))
    start = time.perf_counter()
    sol = solve_local(problem, tol=1e-10, max_iter=40)
    elapsed = time.perf_counter() - start
    ratio = sol.info["ratio"]
    bound = a0 / (1 - a0) + 0.1
    ok = sol.passed and sol.certificate["cr_residual"] <= 1e-10 and sol.info["iterations"] <= 40 and ratio < bound
    check(5, "local solver, bump a0 = 0.3", ok,
          f"residual {sol.certificate['cr_residual']:.1e} after {sol.info['iterations']} iterations "
          f"({sol.info['method']}), contraction ratio {ratio:.3f} < {bound:.3f}", elapsed, 5.0)


def _model_problem(shift):
    # linearisation at the standard disc through (1, 0.7): P = diag(conj z, conj w) on the circle,
    # z(0) = 0, w(0) fixed, tangential constraint at zeta = 1, radius of the w-circle free
    z = DiscFunction.holomorphic(np.array([[0.0, 1.0]]), 1).boundary().conj().coeffs[0]
    first = np.convolve(z, BoundaryMatrix.monomial(shift).coeffs[0, 0]) if shift else z
    P = BoundaryMatrix.diagonal([first, np.array([0.7])])
    cons = point_constraints(0, 0.0, 0.0) + point_constraints(1, 0.0, 0.7) + [point_constraints(0, 1.0, 1.0)[1]]
    return P, cons, np.array([[0.0, -0.5]])


def test_criterion_06_fredholm_index():
    start = time.perf_counter()
    P, cons, free = _model_problem(0)
    base = {N: fredholm_index(P, cons, free=free, N=N) for N in (16, 24, 32)}
    stable = all(r.index == r.formula_index == 0 for r in base.values())
    shifts = {}
    for k in (-2, -1, 1, 2):
        Pk, cons, free = _model_problem(k)
        rep = fredholm_index(Pk, cons, free=free, N=24)
        shifts[k] = rep.index
        stable &= rep.index == rep.formula_index == -2 * k
    # independent rank oracle for the scalar problems behind the shift rule
    scalar = {k: int(np.subtract(*scalar_kernel_dimensions(k, 24))) for k in (-2, -1, 0, 1, 2)}
    stable &= all(scalar[k] - scalar[k + 1] == 2 for k in (-2, -1, 0, 1))
    elapsed = time.perf_counter() - start
    check(6, "model index 0, shifts change it by 2", stable,
          f"index {[base[N].index for N in (16, 24, 32)]} at N = 16, 24, 32; shifted {shifts}; "
          f"scalar rank oracle {scalar}", elapsed, 30.0)


def _trace_field():
    return builtin_field("lower_triangular", a0=0.5)


@pytest.mark.slow
def test_criterion_07_continuation():
    field = _trace_field()
    p = np.array([1.0, 0.8 + 0.6j])
    start = time.perf_counter()
    tr = trace_family(field, p, N=32, tol=1e-8)
    elapsed = time.perf_counter() - start
    c = tr.final.certificate
    eta = default_eta(field, TorusSpec(1.0, (1.0,)))
    steps = len(tr) - 1
    ok = (tr.complete and tr.passed and tr.ts[-1] == 1.0 and steps <= 200 and abs(c["area"] - np.pi) <= 1e-6
          and c["windings"] == (1, 0) and c["min_w"] >= eta and c["normalization_residual"] <= 1e-12)
    check(7, "lower-triangular a0 = 0.5 traced to t = 1", ok,
          f"{steps} steps, area - pi {c['area'] - np.pi:.1e}, windings {c['windings']}, min|w| {c['min_w']:.3f} "
          f">= eta {eta:.2f}, normalisation {c['normalization_residual']:.1e}, cr {c['cr_residual']:.1e}",
          elapsed, 120.0)


@pytest.mark.slow
def test_criterion_08_foliation():
    start = time.perf_counter()
    sample = sweep_foliation(_trace_field(), count=16, N=32, tol=1e-8)
    elapsed = time.perf_counter() - start
    ok = sample.min_distance > 0 and sample.stable and all(tr.passed for tr in sample.traces)
    check(8, "16-disc sweep is disjoint", ok,
          f"min distance {sample.min_distance:.4f}, refined {sample.refined_min_distance:.4f}, "
          f"closest pair {sample.pair}", elapsed, 600.0)


@pytest.mark.slow
def test_criterion_09_higher_dimension():
    a, b, R = 0.2 - 0.1j, np.array([0.7, 1.2j]), 1.0
    start = time.perf_counter()
    sol, torus = solve_higher_dim(builtin_field("zero", n=3), a, b, R, N=32)
    # closed-form product disc: z = sqrt(R) (u zeta + alpha) / (1 + u conj(alpha) zeta), phi(1) = 1
    alpha = a / np.sqrt(R)
    u = (1 - alpha) / (1 - np.conj(alpha))
    zeta = np.sqrt(np.linspace(0, 1, 9))[:, None] * np.exp(2j * np.pi * np.arange(16) / 16)[None, :]
    exact = np.sqrt(R) * (u * zeta + alpha) / (1 + u * np.conj(alpha) * zeta)
    vals = sol.Z(zeta)
    dev = max(float(np.max(np.abs(vals[0] - exact))), float(np.max(np.abs(vals[1:] - b[:, None, None]))))
    tdev = float(np.max(np.abs(np.array(torus.t) - np.abs(b) ** 2)))
    bump, btorus = solve_higher_dim(builtin_field("bump", n=2, a0=0.5), 0.0, [1.0], 1.0, N=32)
    elapsed = time.perf_counter() - start
    ok = sol.passed and dev <= 1e-12 and tdev <= 1e-12 and bump.passed
    check(9, "n = 3 product disc exact; bump n = 2 certified", ok,
          f"disc dev {dev:.1e}, |t - |b|^2| {tdev:.1e}; bump t = {btorus.t[0]:.6f}, "
          f"cr {bump.certificate['cr_residual']:.1e}, boundary {bump.certificate['boundary_residual']:.1e}",
          elapsed, 120.0)


def test_criterion_10_nonsqueezing():
    start = time.perf_counter()
    rep = nonsqueezing_demo(block_rotation(2, 0.6), np.zeros(2), 0.9, 1.0)
    elapsed = time.perf_counter() - start
    lo, hi = np.pi * 0.81 - 1e-3, np.pi + 1e-3
    check(10, "non-squeezing with a rotation, r = 0.9, R = 1", rep.verdict and lo <= rep.area <= hi,
          f"area {rep.area:.6f} in [{lo:.6f}, {hi:.6f}]", elapsed, 300.0)


def test_criterion_11_energy_identity():
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    worst, failed = 0.0, 0
    for _ in range(50):
        field = builtin_field("calibrated", a0=0.5, seed=int(rng.integers(1000)))
        # anchors well inside the plateau of the w-cutoff keep the structure resolvable at N = 16
        p = np.exp(2j * np.pi * rng.random(2)) * rng.uniform(0.8, 1.2, 2)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v *= 0.3 / np.linalg.norm(v)
        sol = solve_local(LocalProblem(field, DiscFunction.zeros(2, 16), p, v), tol=1e-10)
        failed += not sol.passed
        e = energy(sol.Z, field)
        worst = max(worst, abs(e - interior_area(sol.Z)), abs(e - symplectic_area(sol.Z)))
    elapsed = time.perf_counter() - start
    check(11, "energy equals area for calibrated fields", worst <= 1e-6 and failed == 0,
          f"50 discs, max |energy - area| {worst:.1e}, uncertified {failed}", elapsed, 60.0)


def test_criterion_12_witness():
    start = time.perf_counter()
    values = [dbar_distance_witness(N) for N in range(33)]
    refined = [dbar_distance_witness(N, M=16 * (N + 2)) for N in range(33)]
    elapsed = time.perf_counter() - start
    drift = float(np.max(np.abs(np.subtract(values, refined))))
    check(12, "conj(zeta) stays at distance ~1 from polynomials", min(values) >= 0.99 and drift <= 1e-6,
          f"min witness {min(values):.6f}, drift under 2x sampling {drift:.1e}", elapsed, 10.0)


def test_criterion_13_determinism(tmp_path):
    configs = {
        "check": 'command = "check"\n',
        "trace": 'command = "trace"\nN = 12\ntol = 1e-6\n[field]\nkind = "bump"\na0 = 0.2\n',
        "solve-local": 'command = "solve-local"\nN = 12\n[field]\nkind = "bump"\na0 = 0.3\n'
                       '[anchor]\np = [0.5, 1.0]\nv = [0.5, 0.0]\n',
    }
    start = time.perf_counter()
    same, total = True, 0
    for command, text in configs.items():
        cfg = tmp_path / f"{command}.toml"
        cfg.write_text(text)
        files = []
        for k in range(2):
            out = tmp_path / f"{command}-{k}"
            main([command, "--config", str(cfg), "--out", str(out), "--seed", "12345"])
            with open(out / "manifest.json") as fh:
                files.append(json.load(fh)["files"])
        same &= files[0] == files[1] and len(files[0]) > 0
        total += len(files[0])
    elapsed = time.perf_counter() - start
    check(13, "same seed gives identical checksums", same, f"{total} files over {len(configs)} commands", elapsed)
