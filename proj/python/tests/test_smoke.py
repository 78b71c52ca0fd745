import csv

import pytest

import evoplan


def test_hhi_reference_values():
    assert evoplan.hhi(100.0, [100.0]) == 1.0
    assert evoplan.hhi(100.0, [0.0]) == 1.0
    assert evoplan.hhi(100.0, [50.0, 50.0]) == 0.5
    assert evoplan.hhi(300.0, [100.0]) == pytest.approx(5 / 9, abs=1e-12)


def test_scheduling_matches_oracle():
    deadlines = [2, 2, 2, 4, 4]
    placed = evoplan.greedy_schedule(deadlines, 2, 4)
    assert placed is not None
    assert evoplan.lateness(deadlines, placed) == evoplan.oracle_lateness(deadlines, 2, 4)
    assert evoplan.check_necessary([1, 1, 1], 2, 3) == (False, 1)
    assert evoplan.greedy_schedule([1, 1, 1], 2, 3) is None


def test_generate_and_plan(tmp_path):
    sc = evoplan.generate(stations=30, clusters=120, area_km=20, horizon=8, seed=3)
    assert sc.validate() == []
    shared = evoplan.plan(sc, "shared", out=tmp_path)
    independent = evoplan.plan(sc, "independent")
    assert shared["status"] == "success"
    assert independent["status"] == "success"
    assert shared["total_cost"] <= independent["total_cost"]
    assert len(shared["periods"]) == sc.horizon
    with open(tmp_path / "schedule.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == len(shared["changes"])
    assert shared["decommissions"] == sum(r["kind"] == "decommission" for r in rows)


def test_round_trip_and_settings(tmp_path):
    sc = evoplan.generate(stations=20, clusters=60, area_km=15, horizon=6, seed=1)
    evoplan.save_scenario(sc, tmp_path / "sc")
    back = evoplan.load_scenario(tmp_path / "sc")
    assert (back.num_stations, back.num_clusters, back.horizon) == (sc.num_stations, sc.num_clusters, sc.horizon)
    tight = back.with_settings(1, 0.8, 0.7)
    assert (tight.change_rate, tight.h_max) == (1, 0.8)
    assert evoplan.minimum_change_rate(back) >= 1


def test_unknown_parameter():
    with pytest.raises(KeyError):
        evoplan.generate(nonsense=1)
