"""Command line: ``jdisc <command> --config <path> [--out <dir>] [--seed <u64>]``.

Exit codes
    0  every certificate passed
    1  a certificate failed
    2  configuration or setup error
    3  numerical failure (divergence, breakdown, obstruction, ...)
    4  alarm (separation, foliation, boundedness)
"""

import argparse
import dataclasses
import logging
import os
import platform
import sys
import time

import numpy as np

from . import __version__, acs, figures
from .config import COMMANDS, load_config, to_dict
from .continuation import (
    block_rotation,
    nonsqueezing_demo,
    solve_higher_dim,
    solve_on_torus,
    standard_disc,
    disc_normalization,
    sweep_foliation,
    trace_family,
)
from .disc import DiscFunction, cauchy_green
from .errors import ConfigError, JDiscError
from .fields import builtin_field, check_field
from .local import LocalProblem, solve_local
from .output import emit_plotdata, file_checksum, write_json, write_table
from .rh import BoundaryMatrix, dbar_distance_witness, fredholm_index, point_constraints
from .torus import TorusSpec

log = logging.getLogger("jdisc")


def make_field(fc):
    return builtin_field(fc.kind, n=fc.n, a0=fc.a0, r0=fc.r0, rho_in=fc.rho_in, rho_out=fc.rho_out,
                         seed=fc.pattern_seed, linear=fc.linear)


def make_torus(cfg):
    n = cfg.field.n
    t = cfg.torus.t or (1.0,) * (n - 1)
    if len(t) != n - 1:
        raise ConfigError(f"torus.t: expected {n - 1} radii for n = {n}")
    return TorusSpec(cfg.torus.R, t, cfg.torus.convention)


def make_point(cfg, torus):
    if cfg.anchor.p:
        p = np.array(cfg.anchor.p, dtype=complex)
        if len(p) != torus.n:
            raise ConfigError(f"anchor.p: expected {torus.n} components")
        return p
    return torus.radii().astype(complex)


def _controls(cfg):
    c = cfg.continuation
    return dict(dt0=c.dt0, dt_min=c.dt_min, dt_max=c.dt_max, max_steps=c.max_steps,
                max_newton=c.max_newton, eta=None if c.eta < 0 else c.eta)


# --- workflows -------------------------------------------------------------------------

def _solve_local(cfg, out):
    field = make_field(cfg.field)
    n, N = field.n, cfg.N
    lc = cfg.local
    if lc.W:
        if len(lc.W) != n:
            raise ConfigError(f"local.W: expected {n} components")
        deg = max(len(w) for w in lc.W)
        series = np.zeros((n, max(deg, 1)), dtype=complex)
        for j, w in enumerate(lc.W):
            series[j, : len(w)] = w
        problem = LocalProblem(field, DiscFunction.holomorphic(series, N), lam=lc.lam)
    else:
        p = np.array(cfg.anchor.p or (0.0,) * n, dtype=complex)
        v = np.array(cfg.anchor.v or (1.0,) + (0.0,) * (n - 1), dtype=complex)
        problem = LocalProblem(field, DiscFunction.zeros(n, N), p, v, lc.lam)
    sol = solve_local(problem, tol=cfg.tol, max_iter=lc.max_iter, use_chart=lc.use_chart, lam0=lc.lam0)
    files = emit_plotdata(sol, out)
    files.append(write_table(os.path.join(out, "iterations.dat"), ["iteration[1]", "residual[1]", "step[1]"],
                             [[i + 1, r, s] for i, (r, s) in enumerate(zip(sol.info["residuals"],
                                                                            sol.info["steps"]))],
                             "local iteration history"))
    files.append(figures.plot_disc(sol, os.path.join(out, "disc.png")))
    files.append(figures.plot_convergence(sol.info["residuals"], os.path.join(out, "convergence.png")))
    cert = dict(sol.certificate, iterations=sol.info["iterations"], ratio=sol.info["ratio"],
                lam=sol.info["lam"], method=sol.info["method"])
    return sol.passed, cert, files


def _newton(cfg, out):
    field = make_field(cfg.field)
    torus = make_torus(cfg)
    p = make_point(cfg, torus)
    eta = None if cfg.continuation.eta < 0 else cfg.continuation.eta
    sol = solve_on_torus(standard_disc(p, cfg.N), field.scaled(cfg.continuation.scale), torus,
                         disc_normalization(p), cfg.tol, eta, max_iter=cfg.continuation.max_newton)
    files = emit_plotdata(sol, out)
    files.append(write_table(os.path.join(out, "newton.dat"), ["iteration[1]", "defect[1]", "step[1]"],
                             [[i + 1, r, s] for i, (r, s) in enumerate(zip(sol.info["residuals"],
                                                                            sol.info["steps"]))],
                             "Newton history"))
    files.append(figures.plot_disc(sol, os.path.join(out, "disc.png")))
    files.append(figures.plot_convergence(sol.info["steps"], os.path.join(out, "newton.png"), "step"))
    return sol.passed, dict(sol.certificate, iterations=sol.info["iterations"]), files


def _trace(cfg, out):
    field = make_field(cfg.field)
    torus = make_torus(cfg)
    p = make_point(cfg, torus)
    trace = trace_family(field, p, torus, N=cfg.N, tol=cfg.tol, **_controls(cfg))
    files = emit_plotdata(trace, out)
    files.append(figures.plot_trace(trace, os.path.join(out, "trace.png")))
    files.append(figures.plot_disc(trace.final, os.path.join(out, "disc.png")))
    cert = dict(trace.final.certificate, steps=len(trace) - 1, rejected=len(trace.failures))
    return trace.passed, cert, files


def _foliate(cfg, out):
    field = make_field(cfg.field)
    fc = cfg.foliation
    c = _controls(cfg)
    sample = sweep_foliation(field, fc.count, fc.rho, cfg.torus.R, cfg.N, cfg.tol, (fc.eval_nr, fc.eval_nt),
                             **c)
    files = emit_plotdata(sample, out)
    files.append(figures.plot_foliation(sample, os.path.join(out, "foliation.png")))
    passed = all(tr.passed for tr in sample.traces) and sample.stable
    cert = {"min_distance": sample.min_distance, "refined_min_distance": sample.refined_min_distance,
            "closest_pair": sample.pair, "stable": sample.stable,
            "discs_passed": sum(tr.passed for tr in sample.traces)}
    return passed, cert, files


def _solve_nd(cfg, out):
    field = make_field(cfg.field)
    n = field.n
    b = cfg.anchor.b or (1.0,) * (n - 1)
    if len(b) != n - 1:
        raise ConfigError(f"anchor.b: expected {n - 1} components")
    R = cfg.torus.R if cfg.torus.convention == "squared" else cfg.torus.R ** 2
    sol, torus = solve_higher_dim(field, cfg.anchor.a, b, R, N=cfg.N, tol=cfg.tol, **_controls(cfg))
    files = emit_plotdata(sol, out)
    files.append(write_table(os.path.join(out, "radii.dat"), ["component[1]", "t[1]"],
                             [[j + 1, t] for j, t in enumerate(torus.t)], "discovered squared radii"))
    files.append(figures.plot_disc(sol, os.path.join(out, "disc.png")))
    return sol.passed, dict(sol.certificate, t=list(torus.t)), files


def _nonsqueeze(cfg, out):
    ns = cfg.nonsqueeze
    n = cfg.field.n
    if n < 2:
        raise ConfigError("nonsqueeze needs field.n >= 2")
    if ns.map == "identity":
        S = np.eye(2 * n)
    elif ns.map == "rotation":
        S = block_rotation(n, ns.angle)
    else:
        S = np.eye(2 * n)
        S[0, 0], S[n, n] = ns.squeeze, 1.0 / ns.squeeze
    shift = np.zeros(n, dtype=complex)
    shift[: len(ns.shift)] = ns.shift
    report = nonsqueezing_demo(S, shift, ns.r, ns.R, N=cfg.N, tol=cfg.tol)
    files = emit_plotdata(report, out)
    files.append(figures.plot_nonsqueeze(report, os.path.join(out, "nonsqueeze.png")))
    files.append(figures.plot_disc(report.solution, os.path.join(out, "disc.png")))
    cert = {"area": report.area, "lower": report.lower, "upper": report.upper, "verdict": report.verdict,
            "notes": report.notes, "disc": report.solution.certificate}
    return report.verdict, cert, files


def run_check_suite(cfg, seed):
    """Invariant suite: (name, measured, threshold, passed) rows."""
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, value, threshold, ok):
        rows.append((name, float(value), float(threshold), bool(ok)))

    worst = 0.0
    for _ in range(50):
        A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        A *= 0.95 * rng.random() / acs.operator_norm(A)
        J = acs.a_to_j(A)
        worst = max(worst, np.max(np.abs(acs.j_to_a(J) - A)), np.max(np.abs(J @ J + np.eye(4))))
    add("j_a_round_trip", worst, 1e-10, worst <= 1e-10)

    N = 16
    worst = 0.0
    for _ in range(10):
        c = rng.normal(size=(2, N + 1, N + 1)) + 1j * rng.normal(size=(2, N + 1, N + 1))
        P, Q = np.indices((N + 1, N + 1))
        f = DiscFunction(np.where(P + Q <= N - 1, c, 0.0))
        worst = max(worst, np.max(np.abs(cauchy_green(f).dbar().coeffs - f.coeffs)))
    add("dbar_of_cauchy_green", worst, 1e-12, worst <= 1e-12)

    ok = True
    for k in (-2, 0, 1, 3):
        rep = fredholm_index(BoundaryMatrix.monomial(k), 0, N=24)
        ok &= rep.index == rep.formula_index == 1 - 2 * k
    add("scalar_index_formula", 0.0 if ok else 1.0, 0.5, ok)

    P = BoundaryMatrix.diagonal([DiscFunction.holomorphic(np.array([[0, 1.0]]), 1).boundary().conj(),
                                 np.array([0.7])])
    cons = point_constraints(0, 0.0, 0.0) + point_constraints(1, 0.0, 0.7) + \
        [point_constraints(0, 1.0, 1.0)[1]]
    rep = fredholm_index(P, cons, free=np.array([[0.0, -0.5]]), N=24)
    add("model_torus_index", rep.index, 0, rep.index == 0 == rep.formula_index)

    w = dbar_distance_witness(16)
    add("dbar_distance_witness", w, 0.99, w >= 0.99)

    field = make_field(cfg.field)
    for name, (passed, value) in check_field(field, count=500, seed=seed % (2**32)).items():
        add(f"field_{name}", value, 0.0, passed)

    n = cfg.field.n
    if n >= 2:
        q = np.exp(0.3j)
        zero = builtin_field("zero", n=n)
        p = np.array([1.0] + [q] * (n - 1))
        tr = trace_family(zero, p, N=16)
        dev = max(np.max(np.abs(s.Z.coeffs - standard_disc(p, 16).coeffs)) for s in tr.solutions)
        add("zero_field_trace_exact", dev, 1e-12, dev <= 1e-12 and tr.passed)
    return rows


def _check(cfg, out, seed):
    rows = run_check_suite(cfg, seed)
    files = [write_table(os.path.join(out, "check.dat"),
                         ["check[name]", "value[1]", "threshold[1]", "passed[1]"],
                         [[r[0], *r[1:]] for r in rows], "invariant suite")]
    cert = {r[0]: {"value": r[1], "passed": r[3]} for r in rows}
    return all(r[3] for r in rows), cert, files


WORKFLOWS = {
    "solve-local": _solve_local,
    "newton": _newton,
    "trace": _trace,
    "foliate": _foliate,
    "solve-nd": _solve_nd,
    "nonsqueeze": _nonsqueeze,
}


def run(cfg, out):
    """Run one workflow, write its files and manifest.json; returns (manifest dict, exit code)."""
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    manifest = {
        "tool": "jdisc",
        "version": __version__,
        "command": cfg.command,
        "config": to_dict(cfg),
        "versions": _versions(),
        "complete": False,
    }
    files, passed, cert, error = [], False, {}, None
    try:
        if cfg.command == "check":
            passed, cert, files = _check(cfg, out, cfg.seed)
        else:
            passed, cert, files = WORKFLOWS[cfg.command](cfg, out)
        code = 0 if passed else 1
        manifest["complete"] = True
    except JDiscError as exc:
        code = exc.exit_code
        error = {"type": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "trace", None) is not None:
            try:
                files = emit_plotdata(exc.trace, out, "partial_trace")
            except (TypeError, IndexError):
                pass
        if getattr(exc, "diagnostic", None) is not None:
            error["diagnostic"] = exc.diagnostic
    manifest["passed"] = bool(passed) and code == 0
    manifest["exit_code"] = code
    manifest["certificates"] = cert
    manifest["error"] = error
    manifest["files"] = [{"path": os.path.relpath(f, out), "fnv1a64": file_checksum(f)} for f in sorted(files)]
    manifest["timings"] = {"wall_seconds": time.perf_counter() - start}
    write_json(os.path.join(out, "manifest.json"), manifest)
    return manifest, code


def _versions():
    import matplotlib
    import scipy

    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__}


def _limit_threads():
    threads = os.environ.get("JDISC_THREADS")
    if not threads:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(int(threads))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="jdisc", description="J-complex discs attached to tori")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--out", default="jdisc-out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if cfg.command != args.command:
            cfg = dataclasses.replace(cfg, command=args.command)
    except ConfigError as exc:
        print(f"jdisc: {exc}", file=sys.stderr)
        return exc.exit_code
    limiter = _limit_threads()
    try:
        manifest, code = run(cfg, args.out)
    finally:
        if limiter is not None:
            limiter.unregister()
    status = "passed" if code == 0 else f"exit {code}"
    print(f"jdisc {cfg.command}: {status}; manifest at {os.path.join(args.out, 'manifest.json')}")
    if manifest.get("error"):
        print(f"  {manifest['error']['type']}: {manifest['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
