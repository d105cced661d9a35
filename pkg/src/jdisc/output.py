"""Columnar text output, checksums and the run manifest."""

import json
import os

import numpy as np

from .continuation import FoliationSample, HomotopyTrace, NonsqueezeReport
from .solution import DiscSolution

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data):
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def file_checksum(path):
    with open(path, "rb") as fh:
        return fnv1a64(fh.read())


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_table(path, columns, rows, comment=None):
    """Whitespace-separated columns; header rows name the columns and units ``name[unit]``."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("# " + " ".join(columns))
    for row in rows:
        lines.append(" ".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def boundary_rows(Z, M=256):
    theta = 2 * np.pi * np.arange(M) / M
    vals = Z.boundary().samples(M)
    rows = []
    for i, th in enumerate(theta):
        row = [th]
        for j in range(Z.m):
            row += [vals[j, i].real, vals[j, i].imag]
        rows.append(row)
    cols = ["theta[rad]", "re_z[1]", "im_z[1]"]
    for j in range(1, Z.m):
        cols += [f"re_w{j}[1]", f"im_w{j}[1]"]
    return cols, rows


def emit_plotdata(result, target, stem=None):
    """Write plot data for a result into directory ``target``; returns the written paths."""
    os.makedirs(target, exist_ok=True)
    paths = []
    if isinstance(result, DiscSolution):
        stem = stem or "disc"
        cols, rows = boundary_rows(result.Z)
        paths.append(write_table(os.path.join(target, f"{stem}_boundary.dat"), cols, rows,
                                 "boundary curve of the disc"))
        path = os.path.join(target, f"{stem}_coefficients.txt")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.Z.to_text())
        paths.append(path)
    elif isinstance(result, HomotopyTrace):
        stem = stem or "trace"
        n = result.solutions[0].Z.m
        cols = [c + u for c, u in zip(result.columns(n), _trace_units(n))]
        paths.append(write_table(os.path.join(target, f"{stem}.dat"), cols, result.rows(),
                                 "one row per accepted continuation step"))
        paths += emit_plotdata(result.final, target, stem + "_final")
    elif isinstance(result, FoliationSample):
        stem = stem or "foliation"
        n = result.points.shape[-1]
        cols = ["disc[1]", "arg_q[rad]", "re_zeta[1]", "im_zeta[1]"]
        for j in range(n):
            cols += [f"re_Z{j}[1]", f"im_Z{j}[1]"]
        paths.append(write_table(os.path.join(target, f"{stem}_hypersurface.dat"), cols, result.rows(),
                                 "sampled hypersurface: one row per disc and evaluation point"))
        rows = []
        for k, (q, tr) in enumerate(zip(result.qs, result.traces)):
            c = tr.final.certificate
            rows.append([k, q.real, q.imag, c["cr_residual"], c["boundary_residual"], c["area"], c["min_w"],
                         len(tr)])
        paths.append(write_table(
            os.path.join(target, f"{stem}_discs.dat"),
            ["disc[1]", "re_q[1]", "im_q[1]", "cr_residual[1]", "boundary_residual[1]", "area[1]",
             "min_w[1]", "steps[1]"], rows, "final certificate per disc"))
    elif isinstance(result, NonsqueezeReport):
        stem = stem or "nonsqueeze"
        paths.append(write_table(
            os.path.join(target, f"{stem}.dat"),
            ["r[1]", "R[1]", "area_inside[1]", "lower[1]", "upper[1]", "verdict[1]"],
            [[result.r, result.R, result.area, result.lower, result.upper, result.verdict]],
            "area of the disc inside the image of the ball"))
        paths += emit_plotdata(result.solution, target, stem + "_disc")
    else:
        raise TypeError(f"no plot data for {type(result).__name__}")
    return paths


def _trace_units(n):
    return ["[1]"] * (4 + n + 4)


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    return v


def write_json(path, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
