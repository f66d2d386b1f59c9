import csv

import numpy as np
import pytest

from haptosim.config import parse_config
from haptosim.errors import ConfigError, InvalidInitialData
from haptosim.harness import (lemma_report, make_initial_state, read_snapshot, run_simulation, run_sweep,
                              write_snapshot)
from haptosim.model import Grid2D, State

SMALL = """
grid.nx = 16
grid.ny = 16
run.t_end = 0.5
run.sample_every = 0.1
"""


def cfg_for(tmp_path, extra="", **overrides):
    return parse_config(SMALL + extra + f"\nrun.output_dir = {tmp_path / 'out'}\n", overrides)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_steady_state_run(tmp_path):
    cfg = cfg_for(tmp_path, "initial.kind = constant\ninitial.u = 1\ninitial.v = 1\ninitial.w = 0\n", **{"run.t_end": "1"})
    rep = run_simulation(cfg)
    assert rep.exit_code == 0
    rows = read_rows(tmp_path / "out" / "diagnostics.csv")
    assert len(rows) == 11
    first = rows[0]
    for row in rows:
        for key in first:
            if key != "t":
                assert abs(float(row[key]) - float(first[key])) <= 1e-6


def test_zero_data_run(tmp_path):
    cfg = cfg_for(tmp_path, "initial.kind = constant\ninitial.u = 0\ninitial.v = 0\ninitial.w = 0\n")
    rep = run_simulation(cfg)
    assert rep.exit_code == 0
    for row in read_rows(tmp_path / "out" / "diagnostics.csv"):
        assert all(float(v) == 0 for k, v in row.items() if k != "t")


def test_tiny_threshold_exits_two(tmp_path):
    rep = run_simulation(cfg_for(tmp_path, "stepper.blowup_threshold = 0.5\n"))
    assert rep.exit_code == 2 and rep.status == "blowup_suspected"
    assert "exit_code = 2" in (tmp_path / "out" / "report.txt").read_text()


def test_determinism_byte_identical(tmp_path):
    text = SMALL + "initial.perturbation = 0.2\nrun.seed = 7\nrun.exponents = 1.5, 2, 3\n"
    a = parse_config(text + f"run.output_dir = {tmp_path / 'a'}\n")
    b = parse_config(text + f"run.output_dir = {tmp_path / 'b'}\n")
    run_simulation(a)
    run_simulation(b)
    assert (tmp_path / "a" / "diagnostics.csv").read_bytes() == (tmp_path / "b" / "diagnostics.csv").read_bytes()


def test_seed_changes_perturbation(tmp_path):
    base = SMALL + "initial.perturbation = 0.2\n"
    s1 = make_initial_state(parse_config(base + "run.seed = 1\n"))
    s2 = make_initial_state(parse_config(base + "run.seed = 2\n"))
    assert not np.array_equal(s1.u, s2.u)
    assert min(s1.u.min(), s1.v.min(), s1.w.min()) >= 0


def test_snapshots_written_at_requested_times(tmp_path):
    cfg = cfg_for(tmp_path, "run.snapshot_times = 0, 0.25\n")
    rep = run_simulation(cfg)
    names = sorted(p.name for p in (tmp_path / "out").glob("snapshot_*.f64"))
    # 0.25 is not a sample time, so the first sample after it (0.3) is written
    assert names == ["snapshot_0.3.f64", "snapshot_0.5.f64", "snapshot_0.f64"]
    final = read_snapshot(tmp_path / "out" / "snapshot_0.5.f64", cfg.grid)
    assert np.array_equal(final.u, rep.final_state.u) and final.t == pytest.approx(0.5)


def test_snapshot_round_trip_and_file_initial(tmp_path):
    g = Grid2D.from_extent(5, 3, 1.0, 1.0)
    rng = np.random.default_rng(0)
    s = State(rng.random(g.shape), rng.random(g.shape), rng.random(g.shape), 0.125)
    path = write_snapshot(tmp_path, s, g)
    back = read_snapshot(path, g)
    assert back.t == 0.125 and all(np.array_equal(x, y) for x, y in ((s.u, back.u), (s.v, back.v), (s.w, back.w)))
    assert path.stat().st_size == 3 * 15 * 8
    cfg = parse_config(f"grid.nx = 5\ngrid.ny = 3\ninitial.kind = file\ninitial.path = {path}\n")
    assert np.array_equal(make_initial_state(cfg).w, s.w)
    with pytest.raises(InvalidInitialData):
        read_snapshot(path, Grid2D.unit_square(4))
    with pytest.raises(InvalidInitialData):
        read_snapshot(tmp_path / "nope.f64")


def test_sweep_three_values(tmp_path, monkeypatch):
    monkeypatch.setenv("HAPTOSIM_THREADS", "1")
    rows = run_sweep(cfg_for(tmp_path), "mu", [0.1, 1, 10])
    assert [r.value for r in rows] == [0.1, 1.0, 10.0]
    assert all(r.status == "ok" for r in rows)
    table = read_rows(tmp_path / "out" / "sweep.csv")
    assert len(table) == 3
    assert (tmp_path / "out" / "mu_002" / "diagnostics.csv").exists()


def test_sweep_empty(tmp_path):
    assert run_sweep(cfg_for(tmp_path), "chi", []) == []
    assert read_rows(tmp_path / "out" / "sweep.csv") == []


def test_sweep_repeated_values_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("HAPTOSIM_THREADS", "2")
    rows = run_sweep(cfg_for(tmp_path, "initial.perturbation = 0.1\nrun.seed = 3\n"), "xi", [0.5, 0.5])
    assert rows[0] == rows[1]


def test_sweep_bad_axis(tmp_path):
    with pytest.raises(ConfigError):
        run_sweep(cfg_for(tmp_path), "tau", [1.0])


def test_lemma_report_defaults():
    rep = lemma_report(parse_config("params.xi = 0\nparams.chi = 1\n"))
    assert rep["rho"] == 1.0
    assert rep["h_min"] == pytest.approx(1.0, rel=1e-10)
    assert rep["stated_closed_form"] == pytest.approx(1.0, rel=1e-10)
    assert rep["g_at_1"] == 1.0 and rep["g_p0"] > 0
    rep = lemma_report(parse_config("params.mu = 0\nparams.chi = 0\n"))
    assert rep["p0"].startswith("infeasible") and "unavailable" in rep["h_min"]
