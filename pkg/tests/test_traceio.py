from __future__ import annotations

import numpy as np
import pytest

from sawlab.core import Trace, TraceMeta
from sawlab.estimate import FitResult
from sawlab.qd import PLMap
from sawlab.traceio import (
    read_fit_report,
    read_map_csv,
    read_trace_csv,
    read_trace_json,
    write_fit_report,
    write_map_csv,
    write_sparam_csv,
    write_trace_csv,
    write_trace_json,
)


def test_trace_csv_round_trip_exact(tmp_path) -> None:
    t = Trace(np.array([1.0, 2.5, 3.75]), np.array([0.1, -2.0, 7.0]),
              y_err=np.array([0.01, 0.02, 0.03]))
    path = tmp_path / "t.csv"
    write_trace_csv(t, path)
    back = read_trace_csv(path)
    assert np.array_equal(back.x, t.x)
    assert np.array_equal(back.y, t.y)
    assert np.array_equal(back.y_err, t.y_err)


def test_trace_csv_header_and_line_endings(tmp_path) -> None:
    t = Trace(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    path = tmp_path / "t.csv"
    write_trace_csv(t, path)
    raw = path.read_bytes()
    assert raw.startswith(b"x_hz,counts\n")
    assert b"\r" not in raw


def test_sparam_csv_round_trip(tmp_path) -> None:
    f = np.linspace(3.4e9, 3.6e9, 11)
    s = np.exp(1j * np.linspace(0, 1, 11)) * np.linspace(1.0, 0.2, 11)
    path = tmp_path / "s.csv"
    write_sparam_csv(Trace(f, s), path)
    raw = path.read_text()
    assert raw.splitlines()[0] == "f_hz,re,im,mag_db"
    back = read_trace_csv(path)
    assert back.is_complex
    assert np.array_equal(back.x, f)
    assert np.array_equal(back.y, s)


def test_sparam_mag_db_column(tmp_path) -> None:
    f = np.array([1.0, 2.0])
    s = np.array([1.0 + 0j, 0.1 + 0j])
    path = tmp_path / "s.csv"
    write_sparam_csv(Trace(f, s), path)
    rows = [ln.split(",") for ln in path.read_text().splitlines()[1:]]
    assert float(rows[0][3]) == pytest.approx(0.0, abs=1e-12)
    assert float(rows[1][3]) == pytest.approx(-20.0, rel=1e-12)


def test_unknown_header_rejected(tmp_path) -> None:
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="unrecognized"):
        read_trace_csv(path)


def test_trace_json_round_trip(tmp_path) -> None:
    t = Trace(np.array([0.0, 1.0]), np.array([2.0, 3.0]),
              meta=TraceMeta(x_label="frequency", x_unit="Hz", provenance="test",
                             warnings=("insufficient_padding",)))
    path = tmp_path / "t.json"
    write_trace_json(t, path)
    back = read_trace_json(path)
    assert np.array_equal(back.x, t.x)
    assert np.array_equal(back.y, t.y)
    assert back.meta.warnings == ("insufficient_padding",)
    assert back.meta.x_unit == "Hz"


def test_complex_trace_json_round_trip(tmp_path) -> None:
    t = Trace(np.array([0.0, 1.0]), np.array([1 + 2j, 3 - 4j]))
    path = tmp_path / "t.json"
    write_trace_json(t, path)
    back = read_trace_json(path)
    assert back.is_complex
    assert np.array_equal(back.y, t.y)


def test_map_csv_round_trip(tmp_path) -> None:
    m = PLMap(bias=np.array([0.0, 0.01]), frequency=np.array([1.0, 2.0, 3.0]),
              counts=np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]]),
              plateau_index=np.array([0, -1]))
    path = tmp_path / "m.csv"
    write_map_csv(m, path)
    back = read_map_csv(path)
    assert np.array_equal(back.bias, m.bias)
    assert np.array_equal(back.frequency, m.frequency)
    assert np.array_equal(back.counts, m.counts)
    assert back.plateau_index.tolist() == [0, -1]


def test_fit_report_schema(tmp_path) -> None:
    fit = FitResult(params={"center": 1.0}, uncertainties={"center": 0.1},
                    residual_norm=0.5, converged=True, n_iter=7,
                    model="lorentzian_peak", notes=("note",))
    path = tmp_path / "fit.json"
    write_fit_report(fit, path)
    obj = read_fit_report(path)
    assert set(obj) == {"model", "params", "sigma", "residual_norm",
                        "converged", "n_iter", "notes"}
    assert obj["params"]["center"] == 1.0
    assert obj["sigma"]["center"] == 0.1
    assert obj["converged"] is True
