"""Output emission: RFC-4180 CSV, stable JSON, deterministic SVG, binary snapshots.

Every writer goes through :func:`atomic_write_bytes` (write to a temporary
file in the target directory, then ``os.replace``), so a reader never sees a
partially written file.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import os
import tempfile
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "OutputError",
    "atomic_write_bytes",
    "atomic_write_text",
    "format_float",
    "csv_text",
    "write_csv",
    "read_csv",
    "to_jsonable",
    "json_text",
    "write_json",
    "load_schema",
    "validate_json",
    "svg_line_plot",
    "write_svg",
    "write_snapshot",
    "read_snapshot",
    "results_root",
    "canonical_hash",
]


class OutputError(OSError):
    """I/O failure with the offending path in the message."""


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name + ".", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def format_float(v) -> str:
    """Shortest round-trip representation (repr), locale-independent."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return repr(f)
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    if not header:
        raise ValueError("CSV header is mandatory")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(list(header))
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"row length {len(r)} != header length {len(header)}")
        w.writerow([format_float(v) for v in r])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> Tuple[List[str], List[List[Any]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            r = csv.reader(fh)
            header = next(r)
            rows = [[_parse_cell(c) for c in row] for row in r]
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    return header, rows


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def to_jsonable(obj):
    """Convert numpy scalars/arrays, enums, paths and complex numbers; non-finite → string."""
    import enum
    import dataclasses
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(np.real(obj))), "im": to_jsonable(float(np.imag(obj)))}
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    return obj


def json_text(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json_text(obj))


def load_schema(name: str) -> dict:
    fname = name if name.endswith(".json") else name + ".schema.json"
    with resources.files("adswk.schemas").joinpath(fname).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def validate_json(obj, schema_name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``obj`` violates the shipped schema."""
    import jsonschema
    jsonschema.validate(to_jsonable(obj), load_schema(schema_name))


def canonical_hash(obj, length: int = 16) -> str:
    payload = json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:length]


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _esc(s: str) -> str:
    return (str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def svg_line_plot(series: Sequence[Tuple[Sequence[float], Sequence[float], str]],
                  title: str = "", xlabel: str = "", ylabel: str = "",
                  width: int = 480, height: int = 320,
                  xlim: Optional[Tuple[float, float]] = None,
                  ylim: Optional[Tuple[float, float]] = None) -> str:
    """Deterministic polyline plot; coordinates printed with 2 decimals."""
    ml, mr, mt, mb = 56, 16, 28, 40
    pw, ph = width - ml - mr, height - mt - mb
    xs_all = np.concatenate([np.asarray(s[0], float) for s in series]) if series else np.zeros(1)
    ys_all = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    fin = np.isfinite(xs_all) & np.isfinite(ys_all)
    xs_all, ys_all = xs_all[fin], ys_all[fin]
    if xlim is None:
        xlim = (float(xs_all.min()), float(xs_all.max())) if xs_all.size else (0.0, 1.0)
    if ylim is None:
        ylim = (float(ys_all.min()), float(ys_all.max())) if ys_all.size else (0.0, 1.0)
    if xlim[1] == xlim[0]:
        xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
    if ylim[1] == ylim[0]:
        ylim = (ylim[0] - 0.5, ylim[1] + 0.5)

    def X(v):
        return ml + (v - xlim[0]) / (xlim[1] - xlim[0]) * pw

    def Y(v):
        return mt + ph - (v - ylim[0]) / (ylim[1] - ylim[0]) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="18" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13">{_esc(title)}</text>')
    for i in range(5):
        fx = xlim[0] + (xlim[1] - xlim[0]) * i / 4
        fy = ylim[0] + (ylim[1] - ylim[0]) * i / 4
        out.append(f'<text x="{X(fx):.2f}" y="{mt + ph + 14}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="10">{fx:.3g}</text>')
        out.append(f'<text x="{ml - 4}" y="{Y(fy) + 3:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{fy:.3g}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 6}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="12" y="{mt + ph / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 12 {mt + ph / 2:.2f})" font-family="sans-serif" '
                   f'font-size="11">{_esc(ylabel)}</text>')
    for k, (xs, ys, label) in enumerate(series):
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(xs, ys)
                       if math.isfinite(a) and math.isfinite(b))
        color = _COLORS[k % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if label:
            out.append(f'<text x="{ml + pw - 4}" y="{mt + 14 + 13 * k}" text-anchor="end" '
                       f'fill="{color}" font-family="sans-serif" font-size="11">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, svg: str) -> Path:
    return atomic_write_text(path, svg)


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def write_snapshot(base, u: np.ndarray, meta: dict) -> Tuple[Path, Path]:
    """``base.bin`` (little-endian float64, x fastest) plus ``base.json`` sidecar.

    Complex fields are stored as two consecutive planes (real, imaginary).
    """
    base = Path(base)
    u = np.asarray(u)
    planes = [u.real, u.imag] if np.iscomplexobj(u) else [u]
    data = b"".join(np.asarray(p, dtype="<f8").ravel(order="F").tobytes() for p in planes)
    side = dict(meta)
    side.update({"dims": list(u.shape), "endianness": "little", "dtype": "float64",
                 "order": "x-fastest", "complex": bool(np.iscomplexobj(u))})
    b = atomic_write_bytes(base.with_suffix(".bin"), data)
    j = write_json(base.with_suffix(".json"), side)
    return b, j


def read_snapshot(base) -> Tuple[np.ndarray, dict]:
    base = Path(base)
    with open(base.with_suffix(".json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    raw = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype="<f8")
    dims = tuple(meta["dims"])
    size = int(np.prod(dims))
    if meta.get("complex"):
        u = raw[:size].reshape(dims, order="F") + 1j * raw[size:].reshape(dims, order="F")
    else:
        u = raw.reshape(dims, order="F")
    return u, meta


def results_root(out: Optional[str] = None) -> Path:
    """Output root: ``ADSWK_OUT`` overrides ``out`` which overrides ``./results``."""
    env = os.environ.get("ADSWK_OUT")
    if env:
        return Path(env)
    return Path(out) if out else Path("results")
