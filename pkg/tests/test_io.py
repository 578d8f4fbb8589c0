import json
import math

import numpy as np
import pytest

from annni_battery.charging import QuenchSpec, _assemble, run_charging, tau_grid
from annni_battery.io import (
    SWEEP_HEADER,
    TRACE_HEADER,
    OutputError,
    dump_json,
    emit_sweep_csv,
    emit_trace_csv,
    format_float,
    read_csv,
    read_sweep_csv,
    read_trace_csv,
    sha256_file,
    write_json,
)
from annni_battery.operators import ChainParams
from annni_battery.sweep import SweepPoint, SweepProtocol, SweepResult, run_sweep, uniform_grid


@pytest.fixture(scope="module")
def trace():
    spec = QuenchSpec(ChainParams.from_kappa(6, 0.3, 0.4), ChainParams.from_kappa(6, 0.4, 0.4))
    return run_charging(spec)


@pytest.mark.parametrize("x", [0.1, 1 / 3, 2.0**-40, 1e300, -0.0, 3.4000000000000004])
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_format_float_specials():
    assert format_float(float("nan")) == "nan"
    assert format_float(float("-inf")) == "-inf"


def test_trace_csv_round_trip(trace, tmp_path):
    path = emit_trace_csv(trace, tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == 102
    rows = read_trace_csv(path)
    np.testing.assert_array_equal([r[0] for r in rows], trace.taus)
    np.testing.assert_array_equal([r[1] for r in rows], trace.work_per_spin)
    np.testing.assert_array_equal([r[4] for r in rows], trace.power)
    assert all(r[1] * 6 == pytest.approx(r[3], rel=1e-15) for r in rows)


def test_trace_csv_is_byte_stable(trace, tmp_path):
    a = emit_trace_csv(trace, tmp_path / "a.csv")
    b = emit_trace_csv(trace, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    assert sha256_file(a) == sha256_file(b)
    assert b"\r" not in a.read_bytes()


def test_sweep_csv_round_trip(tmp_path):
    proto = SweepProtocol("kappa_quench", uniform_grid(0, 1, 5), L=5, taus=tau_grid(4.0, 21))
    res = run_sweep(proto)
    path = emit_sweep_csv(res, tmp_path / "s.csv")
    assert path.read_text().splitlines()[0] == ",".join(SWEEP_HEADER)
    rows = read_sweep_csv(path)
    assert len(rows) == 5
    for row, p in zip(rows, res.points):
        assert row == (p.axis, p.p_max_per_spin, p.tau_star, p.w_at_tau_star_per_spin, p.status)


def test_empty_sweep_is_header_only(tmp_path):
    proto = SweepProtocol("kappa_quench", (0.0,), L=4)
    path = emit_sweep_csv(SweepResult(proto, (), {}), tmp_path / "s.csv")
    assert path.read_text() == ",".join(SWEEP_HEADER) + "\n"
    assert read_sweep_csv(path) == []


def test_failed_point_serializes_nan(tmp_path):
    proto = SweepProtocol("kappa_quench", (0.0,), L=4)
    point = SweepPoint(0.0, 0.0, 0.1, 0.4, 0.4, status="failed", message="boom")
    path = emit_sweep_csv(SweepResult(proto, (point,), {}), tmp_path / "s.csv")
    (row,) = read_sweep_csv(path)
    assert math.isnan(row[1]) and row[4] == "failed"


def test_wrong_header_rejected(trace, tmp_path):
    path = emit_trace_csv(trace, tmp_path / "t.csv")
    with pytest.raises(OutputError):
        read_sweep_csv(path)


def test_missing_and_empty_files(tmp_path):
    with pytest.raises(OutputError):
        read_csv(tmp_path / "missing.csv")
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(OutputError):
        read_csv(tmp_path / "empty.csv")


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        write_json(blocker / "sub" / "m.json", {})


def test_json_sorted_and_stable(tmp_path):
    obj = {"b": 1, "a": [1.5, float("nan")]}
    text = dump_json(obj)
    assert text.index('"a"') < text.index('"b"')
    path = write_json(tmp_path / "m.json", obj)
    back = json.loads(path.read_text())
    assert back["b"] == 1 and math.isnan(back["a"][1])


def test_synthetic_trace_rows(tmp_path):
    spec = QuenchSpec(ChainParams(L=2, h=1.0), ChainParams(L=2, h=1.0), taus=(0.0, 1.0, 2.0))
    path = emit_trace_csv(_assemble(spec, 0.0, [0.0, 1.0, 1.0]), tmp_path / "t.csv")
    assert path.read_text().splitlines()[1:] == [
        "0.0,0.0,0.0,0.0,0.0",
        "1.0,0.5,0.5,1.0,1.0",
        "2.0,0.5,0.25,1.0,0.5",
    ]
