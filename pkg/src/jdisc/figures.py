"""PNG figures rendered next to the columnar output."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps the PNG bytes reproducible
PNG_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=100, metadata=PNG_META)
    plt.close(fig)
    return path


def plot_disc(sol, path, title="disc"):
    Z = sol.Z
    th = np.linspace(0, 2 * np.pi, 400)
    fig, axes = plt.subplots(1, Z.m, figsize=(4 * Z.m, 4))
    axes = np.atleast_1d(axes)
    zeta = np.linspace(0, 1, 9)[:, None] * np.exp(1j * th)[None, :]
    vals = Z(zeta)
    bvals = Z(np.exp(1j * th))
    for j, ax in enumerate(axes):
        for ring in vals[j]:
            ax.plot(ring.real, ring.imag, lw=0.5, color="0.6")
        ax.plot(bvals[j].real, bvals[j].imag, lw=1.5, color="C0")
        ax.set_aspect("equal")
        ax.set_title(f"{title}: component {j}")
    return _save(fig, path)


def plot_trace(trace, path):
    ts = np.array(trace.ts)
    cert = [s.certificate for s in trace.solutions]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
    a1.semilogy(ts, [max(c["cr_residual"], 1e-18) for c in cert], "o-", label="CR residual")
    a1.semilogy(ts, [max(c["boundary_residual"], 1e-18) for c in cert], "s-", label="boundary residual")
    a1.semilogy(ts, [max(c["area_error"], 1e-18) for c in cert], "^-", label="|area - target|")
    a1.set_xlabel("t")
    a1.legend()
    a2.plot(ts, [c["min_w"] for c in cert], "o-")
    a2.set_xlabel("t")
    a2.set_ylabel("min |w|")
    return _save(fig, path)


def plot_convergence(history, path, label="residual"):
    fig, ax = plt.subplots(figsize=(5, 4))
    h = np.maximum(np.asarray(history, dtype=float), 1e-18)
    ax.semilogy(np.arange(1, len(h) + 1), h, "o-")
    ax.set_xlabel("iteration")
    ax.set_ylabel(label)
    return _save(fig, path)


def plot_foliation(sample, path):
    fig, ax = plt.subplots(figsize=(5, 5))
    th = np.linspace(0, 2 * np.pi, 200)
    for tr in sample.traces:
        Z = tr.final.Z
        w = Z(np.linspace(0, 1, 6)[:, None] * np.exp(1j * th)[None, :])[1]
        for ring in w:
            ax.plot(ring.real, ring.imag, lw=0.6)
    ax.set_aspect("equal")
    ax.set_title(f"w-images of {len(sample.traces)} discs, min distance {sample.min_distance:.3g}")
    return _save(fig, path)


def plot_nonsqueeze(report, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.axhspan(report.lower, report.upper, color="0.9")
    ax.axhline(report.area, color="C0", label="area inside image")
    ax.set_ylim(0, report.upper * 1.1)
    ax.set_xticks([])
    ax.legend()
    ax.set_title(f"r = {report.r}, R = {report.R}")
    return _save(fig, path)


def figure_path(target, name):
    return os.path.join(target, name)
