import csv
import io
import math

import pytest

from qillum.errors import ParameterError
from qillum.experiments import (
    COLUMN_HELP,
    COLUMNS,
    FIGURES,
    SweepSpec,
    emit_csv,
    exponents,
    format_csv,
    run_sweep,
    sweep_comments,
)
from qillum.protocols import ProtocolParams

SMALL = ProtocolParams(dim=6)


def parse(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_every_column_is_documented():
    for figure in FIGURES:
        assert set(COLUMNS[figure]) <= set(COLUMN_HELP)


def test_empty_sweep_gives_header_only():
    assert format_csv([], ["a", "b"]) == "a,b\n"


def test_number_formatting():
    text = format_csv([{"x": 1 / 3, "n": 7, "z": -1e-16, "blank": None}], ["x", "n", "z", "blank"])
    assert text.splitlines()[1] == "0.333333333333,7,0,"
    with pytest.raises(ParameterError):
        format_csv([{"x": math.nan}], ["x"])


def test_emit_csv_writes_and_reports_io_errors(tmp_path):
    path = emit_csv([{"a": 1}], tmp_path / "out.csv", ["a"], ["note"])
    assert path.read_text() == "# note\na\n1\n"
    with pytest.raises(OSError):
        emit_csv([], tmp_path / "missing" / "out.csv", ["a"])


def test_spec_validation():
    with pytest.raises(ParameterError):
        SweepSpec("fig9")
    with pytest.raises(ParameterError):
        SweepSpec("eps-vs-p", grids={"p": []})
    with pytest.raises(ParameterError):
        SweepSpec("eps-vs-p", jobs=0)


def test_convergence_rows_and_relative_change():
    rows = run_sweep(SweepSpec("convergence", SMALL, {"dim": [6, 4, 8]}))
    assert [r["dim"] for r in rows] == [4, 6, 8]
    assert all(math.isfinite(r["epsilon_ico"]) for r in rows)
    r4, r6 = rows[0], rows[1]
    assert r4["rel_change_qi"] == pytest.approx(abs(r4["epsilon_qi"] - r6["epsilon_qi"]) / r4["epsilon_qi"])
    assert rows[-1]["rel_change_qi"] is None
    parsed = parse(format_csv(rows, COLUMNS["convergence"]))
    for key in ("epsilon_qi", "epsilon_psde", "epsilon_ico"):
        assert all(float(r[key]) > 0 for r in parsed)
    assert parsed[-1]["rel_change_ico"] == ""


def test_exponent_ordering_at_default_point():
    row = exponents(ProtocolParams())
    assert row["epsilon_ico"] >= row["epsilon_psde"] >= row["epsilon_qi"] > 0


def test_exponents_converge_as_loss_vanishes():
    row = exponents(ProtocolParams(p=0.99, eta=0.05))
    eps = [row[f"epsilon_{k}"] for k in ("qi", "psde", "ico")]
    assert (max(eps) - min(eps)) / min(eps) < 0.01


def test_relative_ico_gain_largest_at_smallest_eta():
    rows = run_sweep(SweepSpec("eps-vs-eta", ProtocolParams(), {"p": [0.2], "eta": [0.01, 0.05, 0.1, 0.3]}))
    gain = [(r["epsilon_ico"] - r["epsilon_qi"]) / r["epsilon_qi"] for r in rows]
    assert gain[0] == max(gain)


def test_gamma_sweep_matches_p_sweep_at_full_coherence():
    g = run_sweep(SweepSpec("gamma-sweep", ProtocolParams(eta=0.05, dim=6), {"gamma": [0.0, 1.0]}))
    p = run_sweep(SweepSpec("eps-vs-p", SMALL, {"eta": [0.05], "p": [0.8]}))
    assert g[1]["epsilon_ico"] == pytest.approx(p[0]["epsilon_ico"], rel=1e-12)
    assert g[0]["rel_improvement_ico"] == pytest.approx(0.0, abs=1e-9)


def test_norm_ratio_rows_are_bounded():
    rows = run_sweep(SweepSpec("norm-ratio", SMALL, {"eta": [0.05], "p": [0.2, 0.9]}))
    assert all(0.0 <= r["ratio"] <= 1.05 for r in rows)
    assert rows[1]["ratio"] == pytest.approx(0.81, abs=0.01)


def test_serial_and_parallel_sweeps_are_byte_identical():
    spec = SweepSpec("eps-vs-eta", SMALL, {"p": [0.5, 0.2], "eta": [0.1, 0.0]})
    serial = format_csv(run_sweep(spec), COLUMNS["eps-vs-eta"], sweep_comments(spec))
    spec.jobs = 2
    parallel = format_csv(run_sweep(spec), COLUMNS["eps-vs-eta"], sweep_comments(spec))
    assert serial == parallel
    rows = parse(serial)
    assert [(r["p"], r["eta"]) for r in rows] == [("0.2", "0"), ("0.2", "0.1"), ("0.5", "0"), ("0.5", "0.1")]
    # identical hypotheses: only eigenvalue mass below the clamp keeps Q_s off 1
    assert all(abs(float(r["epsilon_qi"])) <= 1e-10 for r in rows if r["eta"] == "0")


def test_comments_record_assumptions_and_grids():
    lines = sweep_comments(SweepSpec("eps-vs-p", SMALL, {"p": [0.5]}))
    assert "grid p: 0.5" in lines
    assert any(line.startswith("assumption:") for line in lines)
    assert not any("p=0.8" in line for line in lines if line.startswith("fixed:"))
