"""CSV and JSON serialization for traces, S-parameter sweeps, PL maps and
fit reports.

All writers emit '.' decimals, LF line endings and a fixed column order so
seeded runs are byte-identical. Floats are written with repr (shortest
round-tripping form), so read-back values equal the written ones exactly.

Formats:
  trace CSV     x_hz,counts[,y_err]
  S-param CSV   f_hz,re,im,mag_db
  map CSV       bias_v,x_hz,counts            (long format, row-major)
  trace JSON    {"x": [...], "y": [...] | {"re": [...], "im": [...]},
                 "y_err": [...] | null, "meta": {...}}
  fit JSON      {"model", "params", "sigma", "residual_norm", "converged",
                 "n_iter", "notes"}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Trace, TraceMeta
from .estimate import FitResult
from .qd import PLMap


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trace_csv(t: Trace, path: str | Path) -> None:
    if t.is_complex:
        raise ValueError("complex traces use write_sparam_csv")
    lines = []
    if t.y_err is None:
        lines.append("x_hz,counts")
        for x, y in zip(t.x, t.y):
            lines.append(f"{_fmt(x)},{_fmt(y)}")
    else:
        lines.append("x_hz,counts,y_err")
        for x, y, e in zip(t.x, t.y, t.y_err):
            lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(e)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_sparam_csv(t: Trace, path: str | Path) -> None:
    """Complex S-parameter trace as f_hz,re,im,mag_db."""
    y = np.asarray(t.y, dtype=complex)
    mag = np.abs(y)
    mag_db = 20.0 * np.log10(np.maximum(mag, 1e-300))
    lines = ["f_hz,re,im,mag_db"]
    for f, v, db in zip(t.x, y, mag_db):
        lines.append(f"{_fmt(f)},{_fmt(v.real)},{_fmt(v.imag)},{_fmt(db)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_trace_csv(path: str | Path) -> Trace:
    """Read either the plain trace format or the S-parameter format."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = [c.strip() for c in lines[0].split(",")]
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if header[:4] == ["f_hz", "re", "im", "mag_db"]:
        return Trace(rows[:, 0], rows[:, 1] + 1j * rows[:, 2],
                     meta=TraceMeta(x_label="frequency", x_unit="Hz",
                                    y_label="S-parameter", provenance=str(path)))
    if header[:2] == ["x_hz", "counts"]:
        y_err = rows[:, 2] if len(header) >= 3 and header[2] == "y_err" else None
        return Trace(rows[:, 0], rows[:, 1], y_err=y_err,
                     meta=TraceMeta(x_label="frequency", x_unit="Hz",
                                    y_label="counts", provenance=str(path)))
    raise ValueError(f"unrecognized trace CSV header: {lines[0]!r}")


def write_map_csv(m: PLMap, path: str | Path) -> None:
    lines = ["bias_v,x_hz,counts"]
    for i, b in enumerate(m.bias):
        for x, c in zip(m.frequency, m.counts[i]):
            lines.append(f"{_fmt(b)},{_fmt(x)},{_fmt(c)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_map_csv(path: str | Path) -> PLMap:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines[0].strip() != "bias_v,x_hz,counts":
        raise ValueError(f"unrecognized map CSV header: {lines[0]!r}")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    bias = np.unique(rows[:, 0])
    freq = np.unique(rows[:, 1])
    counts = rows[:, 2].reshape(len(bias), len(freq))
    plateau = np.where(counts.max(axis=1) > 0, 0, -1)
    return PLMap(bias, freq, counts, plateau,
                 meta=TraceMeta(provenance=str(path)))


def _meta_dict(meta: TraceMeta) -> dict:
    return {
        "x_label": meta.x_label, "x_unit": meta.x_unit,
        "y_label": meta.y_label, "y_unit": meta.y_unit,
        "provenance": meta.provenance, "warnings": list(meta.warnings),
    }


def write_trace_json(t: Trace, path: str | Path) -> None:
    if t.is_complex:
        y = {"re": [float(v) for v in t.y.real], "im": [float(v) for v in t.y.imag]}
    else:
        y = [float(v) for v in t.y]
    obj = {
        "x": [float(v) for v in t.x],
        "y": y,
        "y_err": None if t.y_err is None else [float(v) for v in t.y_err],
        "meta": _meta_dict(t.meta),
    }
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", newline="\n")


def read_trace_json(path: str | Path) -> Trace:
    obj = json.loads(Path(path).read_text())
    y = obj["y"]
    if isinstance(y, dict):
        y = np.array(y["re"]) + 1j * np.array(y["im"])
    meta_obj = obj.get("meta", {})
    meta = TraceMeta(
        x_label=meta_obj.get("x_label", "x"), x_unit=meta_obj.get("x_unit", ""),
        y_label=meta_obj.get("y_label", "y"), y_unit=meta_obj.get("y_unit", ""),
        provenance=meta_obj.get("provenance", ""),
        warnings=tuple(meta_obj.get("warnings", ())),
    )
    return Trace(np.asarray(obj["x"], dtype=float), y,
                 y_err=None if obj.get("y_err") is None else np.asarray(obj["y_err"]),
                 meta=meta)


def write_fit_report(fit: FitResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(fit.to_report(), indent=2, sort_keys=True) + "\n",
                          newline="\n")


def read_fit_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
