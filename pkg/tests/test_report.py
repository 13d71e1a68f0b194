"""Report building, file emission and round-trip loading."""

from __future__ import annotations

import json

import numpy as np

from conftest import make_scenario, toy_doc
from vppopt.orchestrator import (
    RunConfig,
    ThresholdEntry,
    run_no_coordination,
    run_vpp,
    sweep_profile_costs,
)
from vppopt.report import (
    NOCOORD_NOTE,
    build_report,
    emit_report,
    emit_thresholds,
    load_long_csv,
    load_profit_json,
    load_profiles_json,
    load_thresholds_csv,
    load_trade_csv,
    load_verify_json,
)


class TestBuildReport:
    def test_series_and_bookkeeping(self, toy):
        result = run_vpp(toy)
        report = build_report(toy, result)
        assert report.mode == "vpp"
        assert report.n_periods == 3
        assert len(report.dam_trade) == 3
        assert set(report.idm_trade) == {1}
        assert np.allclose(
            report.idm_cumulative[1],
            np.array(report.dam_trade) + np.array(report.idm_trade[1]),
            atol=1e-12)
        assert set(report.dispatch) == {"gen", "wind"}
        assert report.storage == {}
        assert set(report.demand) == {"load"}
        assert report.chosen_profiles == {"load": "flat"}
        assert report.failure is None
        assert report.verifier_summary() == []
        assert all(not problems for problems in report.checks.values())

    def test_profits_carry_both_views(self, toy):
        result = run_vpp(toy)
        report = build_report(toy, result)
        assert abs(report.profits["dam"] - 853.0) <= 1e-6
        assert abs(report.total_profit - 863.0) <= 1e-6
        for key, value in report.profits.items():
            assert abs(report.recomputed_profits[key] - value) <= 1e-6

    def test_failed_run_reports_the_failure(self):
        doc = toy_doc()
        doc["network"]["lines"][0]["flowLimit"] = 1.0
        doc["ndres"][0]["pMin"] = [4.0, 6.0, 5.0]
        s = make_scenario(doc)
        report = build_report(s, run_vpp(s))
        assert report.failure == "dam"
        assert report.dam_trade == ()
        assert report.profits == {}
        assert report.sessions[0]["status"] == "infeasible"


class TestEmitAndLoad:
    def test_file_set_for_a_full_run(self, toy, tmp_path):
        report = build_report(toy, run_vpp(toy))
        written = {p.name for p in emit_report(report, tmp_path)}
        assert written == {"dam.csv", "idm_1.csv", "dispatch.csv", "demand.csv",
                           "profit.json", "profiles.json", "verify.json"}
        # no storage unit in the toy, so no storage.csv
        assert not (tmp_path / "storage.csv").exists()

    def test_day_ahead_only_run_emits_no_session_files(self, toy, tmp_path):
        report = build_report(toy, run_vpp(toy, RunConfig(sessions=("dam",))))
        written = {p.name for p in emit_report(report, tmp_path)}
        assert "dam.csv" in written and "profit.json" in written
        assert not any(name.startswith("idm_") for name in written)

    def test_trade_csv_round_trips_at_six_decimals(self, toy, tmp_path):
        report = build_report(toy, run_vpp(toy))
        emit_report(report, tmp_path)
        dam = load_trade_csv(tmp_path / "dam.csv")
        assert dam["period"] == [1.0, 2.0, 3.0]
        assert np.allclose(dam["tradedMW"], report.dam_trade, atol=5e-7)
        idm = load_trade_csv(tmp_path / "idm_1.csv")
        assert np.allclose(idm["tradedMW"], report.idm_trade[1], atol=5e-7)
        assert np.allclose(idm["cumulativeMW"], report.idm_cumulative[1], atol=5e-7)

    def test_long_csvs_round_trip_per_asset(self, toy, tmp_path):
        report = build_report(toy, run_vpp(toy))
        emit_report(report, tmp_path)
        dispatch = load_long_csv(tmp_path / "dispatch.csv")
        assert set(dispatch) == {"gen", "wind"}
        assert np.allclose(dispatch["wind"], report.dispatch["wind"], atol=5e-7)
        demand = load_long_csv(tmp_path / "demand.csv")
        assert np.allclose(demand["load"], report.demand["load"], atol=5e-7)

    def test_profit_json_carries_full_precision(self, toy, tmp_path):
        result = run_vpp(toy)
        report = build_report(toy, result)
        emit_report(report, tmp_path)
        doc = load_profit_json(tmp_path / "profit.json")
        assert doc["scenario"] == "toy"
        assert doc["mode"] == "vpp"
        assert doc["failure"] is None
        # identical down to the bit: json stores the exact double
        assert doc["sessions"]["dam"] == result.profits.per_session["dam"]
        assert doc["total"] == report.total_profit

    def test_profiles_and_verify_json(self, toy, tmp_path):
        report = build_report(toy, run_vpp(toy))
        emit_report(report, tmp_path)
        profiles = load_profiles_json(tmp_path / "profiles.json")
        assert profiles == {"load": {"selected": "flat", "cost": 0.0}}
        verify_doc = load_verify_json(tmp_path / "verify.json")
        assert [sess["key"] for sess in verify_doc["sessions"]] == ["dam", "idm1"]
        assert all(sess["violations"] == [] for sess in verify_doc["sessions"])
        assert verify_doc["summary"] == []
        assert set(verify_doc["checks"]) == {"demandContracts", "aggregateBalance",
                                             "storageConservation"}

    def test_emission_is_idempotent(self, toy, tmp_path):
        report = build_report(toy, run_vpp(toy))
        first = emit_report(report, tmp_path)
        second = emit_report(report, tmp_path)
        assert first == second
        assert json.loads((tmp_path / "profit.json").read_text())["total"] == \
            report.total_profit

    def test_storage_file_appears_with_a_storage_unit(self, tmp_path):
        from test_stu import _stu_scenario

        s = _stu_scenario([5.0, 50.0], [100.0, 0.0])
        report = build_report(s, run_vpp(s))
        written = {p.name for p in emit_report(report, tmp_path)}
        assert "storage.csv" in written
        trace = load_long_csv(tmp_path / "storage.csv")
        assert np.allclose(trace["csp"], [100.0, 0.0], atol=5e-7)


class TestNocoordReport:
    def test_baseline_report_is_labelled_and_passive(self, toy, tmp_path):
        report = build_report(toy, run_no_coordination(toy))
        assert report.mode == "nocoord"
        assert report.note == NOCOORD_NOTE
        assert report.passive_demand_profit == {"load": -180.0}
        assert report.chosen_profiles == {"load": "flat"}
        assert np.allclose(report.demand["load"], [2.0, 2.0, 2.0])
        emit_report(report, tmp_path)
        doc = load_profit_json(tmp_path / "profit.json")
        assert doc["note"] == NOCOORD_NOTE
        assert doc["passiveDemandProfit"] == {"load": -180.0}

    def test_baseline_trade_nets_the_passive_load(self, toy):
        report = build_report(toy, run_no_coordination(toy))
        # isolated unit at 10 MW, wind at availability, 2 MW bought back
        assert np.allclose(report.dam_trade, [12.0, 14.0, 13.0], atol=1e-6)


class TestThresholdFiles:
    def test_round_trip_including_missing_thresholds(self, tmp_path):
        entries = [
            ThresholdEntry("load", "shift", "threshold", 9.25, 0.5),
            ThresholdEntry("load", "late", "never", None, 0.5),
            ThresholdEntry("plant", "day", "above_max", None, 1.0),
        ]
        path = emit_thresholds(entries, tmp_path)
        assert path.name == "thresholds.csv"
        again = load_thresholds_csv(path)
        assert again == entries

    def test_sweep_output_lands_in_the_file(self, toy, tmp_path):
        entries = sweep_profile_costs(toy, "load", "shift")
        path = emit_thresholds(entries, tmp_path)
        (row,) = load_thresholds_csv(path)
        assert (row.demand_id, row.profile_id, row.status) == ("load", "shift", "never")
