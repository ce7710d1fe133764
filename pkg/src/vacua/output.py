"""Deterministic CSV, SVG and manifest output."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from pathlib import Path

import numpy as np

from .errors import ConfigError

SVG_W, SVG_H = 800, 500
MARGIN = {"left": 80, "right": 20, "top": 30, "bottom": 60}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _columns(obj):
    cols = obj.columns() if hasattr(obj, "columns") else obj
    if not isinstance(cols, dict):
        raise TypeError("expected a mapping of column name to samples")
    return cols


def emit_csv(trajectory, path) -> str:
    """Write columns to ``path`` with LF endings; returns the SHA-256 of the bytes."""
    cols = _columns(trajectory)
    names = list(cols)
    arrays = [np.asarray(cols[n], dtype=float).ravel() for n in names]
    n = arrays[0].size if arrays else 0
    if any(a.size != n for a in arrays):
        raise ValueError("columns have different lengths")
    lines = [",".join(names)]
    lines.extend(",".join(fmt(a[i]) for a in arrays) for i in range(n))
    data = ("\n".join(lines) + "\n").encode("ascii")
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path} is empty")
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --------------------------------------------------------------------------
# svg


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _tick_label(v):
    return f"{v:.4g}"


def _range(vals):
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi == lo:
        pad = 0.5 * abs(lo) if lo != 0 else 1.0
        return lo - pad, hi + pad
    return lo, hi


def render_svg(x, ys, labels, xlabel, ylabel, title="") -> str:
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for y in ys]
    pw = SVG_W - MARGIN["left"] - MARGIN["right"]
    ph = SVG_H - MARGIN["top"] - MARGIN["bottom"]
    x0, y0 = MARGIN["left"], MARGIN["top"]
    if x.size:
        xlo, xhi = _range(x)
        ylo, yhi = _range(np.concatenate(ys)) if ys else (-1.0, 1.0)
    else:
        xlo, xhi, ylo, yhi = 0.0, 1.0, 0.0, 1.0

    def px(v):
        return x0 + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return y0 + ph - (v - ylo) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect x="0" y="0" width="{SVG_W}" height="{SVG_H}" fill="white"/>',
        f'<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    for v in _ticks(xlo, xhi):
        X = px(v)
        out.append(f'<line x1="{X:.2f}" y1="{y0 + ph}" x2="{X:.2f}" y2="{y0 + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{y0 + ph + 20}" font-size="12" text-anchor="middle">{_tick_label(v)}</text>')
    for v in _ticks(ylo, yhi):
        Y = py(v)
        out.append(f'<line x1="{x0 - 5}" y1="{Y:.2f}" x2="{x0}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{Y + 4:.2f}" font-size="12" text-anchor="end">{_tick_label(v)}</text>')
    out.append(f'<text x="{x0 + pw / 2:.1f}" y="{SVG_H - 15}" font-size="14" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{y0 + ph / 2:.1f}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {y0 + ph / 2:.1f})">{_esc(ylabel)}</text>'
    )
    if title:
        out.append(f'<text x="{x0 + pw / 2:.1f}" y="20" font-size="14" text-anchor="middle">{_esc(title)}</text>')
    for i, (y, lab) in enumerate(zip(ys, labels)):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = y0 + 15 + 16 * i
        out.append(f'<text x="{x0 + pw - 10}" y="{ly}" font-size="12" text-anchor="end" fill="{color}">{_esc(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_svg(csv_path, x, ys, path, square=False, title="") -> str:
    """Plot columns ``ys`` of a CSV against ``x`` as polylines on an 800x500 canvas.

    ``square=True`` plots y^2 (the usual way sigma is displayed).  Returns
    the SHA-256 of the written bytes.
    """
    cols = read_csv(csv_path)
    ys = [ys] if isinstance(ys, str) else list(ys)
    for name in [x, *ys]:
        if name not in cols:
            raise ConfigError(f"column {name!r} not in {csv_path} (have {', '.join(cols)})")
    series = [cols[y] ** 2 if square else cols[y] for y in ys]
    labels = [f"{y}^2" if square else y for y in ys]
    ylabel = ", ".join(labels)
    data = render_svg(cols[x], series, labels, x, ylabel, title).encode("utf-8")
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


# --------------------------------------------------------------------------
# manifest


def versions():
    import scipy

    from . import __version__

    return {"vacua": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def manifest_digest(content: dict) -> str:
    """SHA-256 of the canonical JSON of ``content`` (timing excluded)."""
    body = {k: v for k, v in content.items() if k not in ("timing", "digest")}
    blob = json.dumps(_clean(body), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def write_manifest(path, config: dict, results, artifacts: dict, wall_time: float) -> dict:
    """Write the run manifest.

    Everything except the ``timing`` block is a function of the
    configuration and code version; ``digest`` hashes exactly that part, so
    repeated runs share a digest even though their wall times differ.
    """
    content = {
        "config": _clean(config),
        "versions": versions(),
        "results": _clean(results),
        "artifacts": dict(sorted(artifacts.items())),
    }
    content["digest"] = manifest_digest(content)
    content["timing"] = {"wall_time_s": float(wall_time)}
    Path(path).write_text(json.dumps(content, indent=2, sort_keys=True) + "\n")
    return content
