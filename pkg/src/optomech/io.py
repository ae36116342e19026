"""CSV, SVG and manifest writers.  Output is a pure function of the inputs."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
from pathlib import Path

import numpy as np
import scipy

from .errors import OptomechError

FLOAT_FMT = ".12g"


class IoError(OptomechError, OSError):
    pass


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return format(float(x), FLOAT_FMT)
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def csv_text(columns: dict, header: dict | None = None) -> str:
    """Render equal-length columns as CSV with a '#'-prefixed header block."""
    names = list(columns)
    data = [np.asarray(columns[k]) for k in names]
    n = {len(d) for d in data}
    if len(n) > 1:
        raise ValueError(f"columns have different lengths: {sorted(n)}")
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*data):
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return path


def write_csv(path: Path, columns: dict, header: dict | None = None) -> Path:
    return write_text(path, csv_text(columns, header))


# ----------------------------------------------------------------- svg

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_plot(series, title="", xlabel="", ylabel="", width=640, height=420, logx=False) -> str:
    """Minimal line plot.  ``series`` is a list of (label, x, y)."""
    ml, mr, mt, mb = 70, 20, 36, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = [np.asarray(x, float) for _, x, _ in series]
    ys = [np.asarray(y, float) for _, _, y in series]
    if logx:
        xs = [np.log10(x) for x in xs]
    fx = np.concatenate([x[np.isfinite(x)] for x in xs]) if xs else np.array([0.0, 1.0])
    fy = np.concatenate([y[np.isfinite(y)] for y in ys]) if ys else np.array([0.0, 1.0])
    x0, x1 = (float(fx.min()), float(fx.max())) if fx.size else (0.0, 1.0)
    y0, y1 = (float(fy.min()), float(fy.max())) if fy.size else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def X(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return mt + (1 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{_esc(xlabel)}</text>',
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>',
    ]
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        xt = f"1e{xv:.2g}" if logx else f"{xv:.3g}"
        out.append(f'<text x="{X(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle">{xt}</text>')
        out.append(f'<text x="{ml - 6}" y="{Y(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for i, ((label, _, _), x, y) in enumerate(zip(series, xs, ys)):
        color = _COLORS[i % len(_COLORS)]
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw - 130}" y1="{ly - 4}" x2="{ml + pw - 110}" y2="{ly - 4}" stroke="{color}"/>')
        out.append(f'<text x="{ml + pw - 104}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ------------------------------------------------------------- manifest


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    from . import __version__

    return {
        "optomech": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_manifest(out_dir: Path, config: dict, files) -> Path:
    entries = [{"file": Path(f).name, "sha256": sha256(f)} for f in sorted(files, key=lambda f: Path(f).name)]
    doc = {"config": _jsonable(config), "versions": versions(), "files": entries}
    return write_text(Path(out_dir) / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
