"""Sweep orchestration: determinism, round trips, presets, error capture."""

import json
import math

import numpy as np
import pytest

from qubit_gp.heom import HeomConfig
from qubit_gp.results import angle_diff
from qubit_gp.rwa import THETA_CRITICAL
from qubit_gp.sweep import (
    CSV_COLUMNS,
    NODAL_SENTINEL,
    SweepSpec,
    THETA_HEAT,
    THETA_LINE,
    W_HEAT,
    W_LINE,
    figure_preset,
    read_table,
    run_figure,
    run_grid,
    write_manifest,
    write_table,
)

SMALL = SweepSpec(
    "rwa-closed",
    thetas=(0.5, 1.2, 2.8),
    couplings=(0.2, 0.9),
    widths=(0.05, 5.0),
)


def test_row_order_theta_major():
    rows = run_grid(SMALL)
    keys = [(r.theta, r.coupling, r.width) for r in rows]
    expected = [
        (th, w, lam)
        for th in SMALL.thetas
        for w in SMALL.couplings
        for lam in SMALL.widths
    ]
    assert keys == expected


def test_determinism_byte_for_byte(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table(run_grid(SMALL), p1)
    write_table(run_grid(SMALL), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_parallel_serial_equivalence(tmp_path):
    p1, p2 = tmp_path / "serial.csv", tmp_path / "pool.csv"
    write_table(run_grid(SMALL, workers=1), p1)
    write_table(run_grid(SMALL, workers=2), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_round_trip_single_row(tmp_path):
    rows = run_grid(SweepSpec("rwa-closed", (1.0,), (0.5,), (0.05,)))
    path = tmp_path / "one.csv"
    write_table(rows, path)
    back = read_table(path)
    assert back == rows


def test_round_trip_full_table(tmp_path):
    rows = run_grid(SMALL)
    path = tmp_path / "grid.csv"
    write_table(rows, path)
    assert read_table(path) == rows


def test_empty_table_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_table([], path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2
    assert read_table(path) == []


def test_json_format(tmp_path):
    rows = run_grid(SweepSpec("jc-limit", (math.pi / 4,), (0.3, 1.0)))
    path = tmp_path / "rows.json"
    write_table(rows, path, fmt="json")
    data = json.loads(path.read_text())
    assert len(data) == 2
    assert set(CSV_COLUMNS) <= set(data[0])
    assert data[0]["lambda"] == 0.0  # jc-limit sentinel width
    assert data[0]["method"] == "jc-limit"


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("rwa-closed", (), (0.5,), (0.05,))
    with pytest.raises(ValueError):
        SweepSpec("rwa-closed", (4.0,), (0.5,), (0.05,))  # theta out of range
    with pytest.raises(ValueError):
        SweepSpec("rwa-closed", (1.0,), (2.0,), (0.05,))  # W beyond 1.5
    with pytest.raises(ValueError):
        SweepSpec("rwa-closed", (1.0,), (0.5,), ())  # missing widths
    with pytest.raises(ValueError):
        SweepSpec("jc-limit", (1.0,), (0.5,), (0.05,))  # jc takes no widths
    with pytest.raises(ValueError):
        SweepSpec("bogus", (1.0,), (0.5,), (0.05,))


def test_presets_match_reference_parameters():
    f1 = figure_preset(1)
    assert len(f1.panels) == 1
    assert f1.panels[0].widths == (5.0, 0.05)
    assert len(f1.panels[0].thetas) == 100 and len(f1.panels[0].couplings) == 100
    assert max(f1.panels[0].couplings) == pytest.approx(1.5)
    assert min(f1.panels[0].couplings) > 0.0

    f2 = figure_preset(2)
    assert [p.label for p in f2.panels] == ["f2a", "f2b", "f2c", "f2d"]
    assert f2.panels[0].couplings == (0.1,)
    assert f2.panels[1].couplings == (0.5,)
    assert f2.panels[2].thetas == (math.pi / 3,)
    assert f2.panels[3].thetas == (math.pi / 10,)
    assert all(p.widths == (0.05,) for p in f2.panels)

    f3 = figure_preset(3)
    assert f3.panels[0].method == "jc-limit"
    assert f3.panels[0].thetas == (math.pi / 4,)
    assert len(f3.panels[0].couplings) == 200

    f4 = figure_preset(4)
    assert f4.panels[0].method == "heom"
    assert f4.panels[0].thetas == figure_preset(1).panels[0].thetas

    f5 = figure_preset(5)
    assert f5.panels[0].couplings == (0.5,) and f5.panels[0].widths == (0.05,)
    assert len(f5.panels[0].thetas) == 200

    f6 = figure_preset(6)
    combos = {(p.couplings[0], p.widths[0]) for p in f6.panels}
    assert combos == {(0.05, 5.0), (0.5, 5.0), (0.05, 0.05), (0.5, 0.05)}
    assert {p.method for p in f6.panels} == {"rwa-closed", "heom"}

    with pytest.raises(ValueError):
        figure_preset(7)


def test_grids_exclude_forbidden_endpoints():
    for grid in (THETA_HEAT, THETA_LINE):
        assert 0.0 < min(grid) and max(grid) < math.pi
    for grid in (W_HEAT, W_LINE):
        assert 0.0 < min(grid) and max(grid) == pytest.approx(1.5)


def test_nodal_sentinel_written_for_undefined_rows(tmp_path):
    # park exactly on a nodal point via root find, then sweep through it
    from scipy.optimize import brentq
    from qubit_gp.bath import BathParams
    from qubit_gp.rwa import final_overlap

    overlap = lambda w: final_overlap(math.pi / 3, BathParams(float(w), 0.05))
    ws = np.linspace(0.05, 1.5, 300)
    vals = [overlap(w) for w in ws]
    i = next(i for i in range(len(ws) - 1) if vals[i] * vals[i + 1] < 0)
    w_star = brentq(overlap, ws[i], ws[i + 1], xtol=1e-15)
    spec = SweepSpec("rwa-closed", (math.pi / 3,), (float(w_star),), (0.05,))
    rows = run_grid(spec)
    assert rows[0].nodal and rows[0].phi_over_pi is None
    path = tmp_path / "nodal.csv"
    write_table(rows, path)
    assert NODAL_SENTINEL in path.read_text()
    assert read_table(path)[0].nodal


def test_error_rows_recorded_and_run_continues():
    # a divergent integrator setting blows up one group; the other survives
    spec = SweepSpec(
        "heom", (0.8,), (0.0, 1.5), (0.05,),
        heom=HeomConfig(depth=8, dt=1.2, t_final=120.0, certify=False),
    )
    rows = run_grid(spec)
    good = [r for r in rows if not r.error]
    bad = [r for r in rows if r.error]
    assert len(good) == 1 and len(bad) == 1
    assert bad[0].coupling == 1.5
    assert "BlowUpError" in bad[0].error
    assert not bad[0].converged


def test_error_rows_serialize_with_sentinel(tmp_path):
    spec = SweepSpec(
        "heom", (0.8,), (1.5,), (0.05,),
        heom=HeomConfig(depth=8, dt=1.2, t_final=120.0, certify=False),
    )
    rows = run_grid(spec)
    path = tmp_path / "err.csv"
    write_table(rows, path)
    assert "error" in path.read_text().splitlines()[2]
    back = read_table(path)
    assert not back[0].converged


def test_manifest_records_configs(tmp_path):
    path = tmp_path / "out.csv.manifest.json"
    write_manifest(path, [SMALL])
    payload = json.loads(path.read_text())
    assert payload["units"] == "omega0 = 1"
    assert payload["specs"][0]["method"] == "rwa-closed"
    assert "certificate_phi" in payload["tolerances"]
    # determinism of the manifest bytes
    path2 = tmp_path / "again.json"
    write_manifest(path2, [SMALL])
    assert path.read_bytes() == path2.read_bytes()


def test_heom_method_rows_carry_certificates():
    spec = SweepSpec(
        "heom", (0.7, 2.2), (0.3,), (0.5,),
        heom=HeomConfig(sample_stride=4),
    )
    rows = run_grid(spec)
    assert all(r.converged for r in rows)
    assert all(not r.nodal for r in rows)


def test_rwa_bargmann_method_matches_closed_form():
    spec = SweepSpec("rwa-bargmann", (math.pi / 3,), (0.5,), (0.05,), n_intervals=4000)
    closed = run_grid(SweepSpec("rwa-closed", (math.pi / 3,), (0.5,), (0.05,)))
    rows = run_grid(spec)
    assert rows[0].phi_over_pi == pytest.approx(closed[0].phi_over_pi, abs=1e-3)
