"""On-disk outputs: history CSV, legacy-VTK frame snapshots, energy chart.

All text formats use %.17g floats so a re-read reproduces the in-memory
values bit-for-bit.  Snapshots are legacy-ASCII STRUCTURED_POINTS files
carrying the three axis vectors as separate VECTORS arrays, consumable by
standard scientific viewers.
"""

from __future__ import annotations

import os

import numpy as np

from .frames import FrameField
from .grid import SpectralGrid
from .integrator import HistoryRecord

_FMT = "%.17g"


def write_history_csv(history, path):
    """One row per accepted step; header matches HistoryRecord fields."""
    with open(path, "w") as fh:
        fh.write(",".join(HistoryRecord.FIELDS) + "\n")
        for rec in history:
            row = []
            for name in HistoryRecord.FIELDS:
                value = getattr(rec, name)
                row.append(str(value) if isinstance(value, int)
                           else _FMT % value)
            fh.write(",".join(row) + "\n")


def read_history_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != HistoryRecord.FIELDS:
            raise ValueError(f"unexpected history header in {path}: {header}")
        records = []
        for line in fh:
            if not line.strip():
                continue
            vals = line.strip().split(",")
            kwargs = {}
            for name, text in zip(HistoryRecord.FIELDS, vals):
                kwargs[name] = int(text) if name in ("step", "residual_evals",
                                                     "newton_iters") \
                    else float(text)
            records.append(HistoryRecord(**kwargs))
    return records


def write_vtk_frame(field: FrameField, path, title="frame field"):
    """Legacy-ASCII structured-points snapshot with vectors n1, n2, n3."""
    g = field.grid
    n1, n2, n3 = g.counts
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {n1} {n2} {n3}\n")
        fh.write("ORIGIN " + " ".join(_FMT % o for o in g.origin) + "\n")
        fh.write("SPACING " + " ".join(_FMT % s for s in g.spacings) + "\n")
        fh.write(f"POINT_DATA {n1 * n2 * n3}\n")
        for j, name in enumerate(("n1", "n2", "n3")):
            fh.write(f"VECTORS {name} double\n")
            # VTK expects the first dimension fastest
            vecs = np.moveaxis(field.data[..., :, j], (0, 1, 2), (2, 1, 0))
            for v in vecs.reshape(-1, 3):
                fh.write(f"{_FMT % v[0]} {_FMT % v[1]} {_FMT % v[2]}\n")


def read_vtk_frame(path):
    """Minimal legacy-VTK reader for round-trip checks.

    Returns (grid, {name: (N1, N2, N3, 3) array}).
    """
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    dims = origin = spacing = None
    vectors = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        tag = parts[0].upper()
        if tag == "DIMENSIONS":
            dims = tuple(int(v) for v in parts[1:4])
        elif tag == "ORIGIN":
            origin = tuple(float(v) for v in parts[1:4])
        elif tag == "SPACING":
            spacing = tuple(float(v) for v in parts[1:4])
        elif tag == "VECTORS":
            name = parts[1]
            count = dims[0] * dims[1] * dims[2]
            values = []
            i += 1
            while len(values) < 3 * count:
                values.extend(float(v) for v in lines[i].split())
                i += 1
            flat = np.array(values).reshape(count, 3)
            arr = flat.reshape(dims[2], dims[1], dims[0], 3)
            vectors[name] = np.moveaxis(arr, (0, 1, 2), (2, 1, 0))
            continue
        i += 1
    extents = tuple(s * n for s, n in zip(spacing, dims))
    grid = SpectralGrid(dims, extents, origin)
    return grid, vectors


def write_energy_svg(history, path, log_scale=False, width=720, height=440):
    """Self-contained SVG line chart of energy against time."""
    ts = [rec.t for rec in history]
    fs = [rec.energy for rec in history]
    if log_scale:
        floor = max(1e-16, min((f for f in fs if f > 0), default=1e-16))
        ys = [np.log10(max(f, floor)) for f in fs]
        ylabel = "log10 F"
    else:
        ys = fs
        ylabel = "F"
    ml, mr, mt, mb = 70, 20, 20, 50
    x0, x1 = (min(ts), max(ts)) if ts else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    sx = (width - ml - mr) / (x1 - x0)
    sy = (height - mt - mb) / (y1 - y0)
    pts = " ".join(f"{ml + (t - x0) * sx:.2f},{height - mb - (y - y0) * sy:.2f}"
                   for t, y in zip(ts, ys))
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
                 f'height="{height}" viewBox="0 0 {width} {height}">\n')
        fh.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')
        fh.write(f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" '
                 f'y2="{height - mb}" stroke="black"/>\n')
        fh.write(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" '
                 f'stroke="black"/>\n')
        if pts:
            fh.write(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" '
                     f'stroke-width="1.5"/>\n')
        fh.write(f'<text x="{(ml + width - mr) / 2}" y="{height - 12}" '
                 f'text-anchor="middle" font-size="14">t</text>\n')
        fh.write(f'<text x="18" y="{(mt + height - mb) / 2}" font-size="14" '
                 f'transform="rotate(-90 18 {(mt + height - mb) / 2})" '
                 f'text-anchor="middle">{ylabel}</text>\n')
        for val, xpos in ((x0, ml), (x1, width - mr)):
            fh.write(f'<text x="{xpos}" y="{height - mb + 18}" font-size="11" '
                     f'text-anchor="middle">{val:.4g}</text>\n')
        for val, ypos in ((y0, height - mb), (y1, mt)):
            fh.write(f'<text x="{ml - 6}" y="{ypos + 4}" font-size="11" '
                     f'text-anchor="end">{val:.4g}</text>\n')
        fh.write("</svg>\n")


def write_sweep_csv(result, path):
    """Convergence-table CSV shared by the verification module and the CLI."""
    with open(path, "w") as fh:
        for row in result.rows():
            fh.write(",".join(str(v) if isinstance(v, (int, str))
                              else _FMT % v for v in row) + "\n")


def export_outputs(result, out_dir, log_scale=False):
    """Write history.csv, frame_<step>.vtk snapshots, and energy.svg."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    def emit(name, writer, *args, **kwargs):
        path = os.path.join(out_dir, name)
        try:
            writer(*args, path, **kwargs)
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        paths.append(path)

    emit("history.csv", write_history_csv, result.history)
    for step, _t, frame in result.snapshots:
        emit(f"frame_{step:06d}.vtk", write_vtk_frame, frame)
    emit("energy.svg", write_energy_svg, result.history, log_scale=log_scale)
    return paths
