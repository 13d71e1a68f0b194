"""Pipeline: sequential runs, baseline aggregation, sweep, checkers."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from conftest import make_scenario, toy_doc
from vppopt.orchestrator import (
    RunConfig,
    check_aggregate_balance,
    check_demand_contracts,
    check_storage_conservation,
    chosen_profiles,
    evaluate_cost_grid,
    passive_demand_profit,
    recompute_profits,
    run,
    run_no_coordination,
    run_vpp,
    session_keys,
    single_asset_scenario,
    sweep_profile_costs,
)
from vppopt.stu import CHG, DIS, ENERGY


def _priced_doc(prices=(40.0, 20.0, 30.0)):
    """Toy variant whose price shape makes the shifted profile save 10."""
    doc = toy_doc()
    doc["calendar"]["damPrices"] = list(prices)
    doc["calendar"]["sessions"][0]["prices"] = list(prices)
    return doc


class TestVppRun:
    def test_full_day_on_the_toy(self, toy):
        result = run_vpp(toy)
        assert result.ok
        assert [r.key for r in result.sessions] == ["dam", "idm1"]
        assert all(r.status == "optimal" for r in result.sessions)
        assert all(r.violations == () for r in result.sessions)
        # day-ahead 853 plus the 10 of intraday band arbitrage
        assert abs(result.profits.total - 863.0) <= 1e-6
        assert result.profits.max_recompute_drift() <= 1e-6
        assert len(result.ledger_history) == 2
        assert result.ledger is result.ledger_history[-1]

    def test_session_prefix_selects_a_subset(self, toy):
        result = run_vpp(toy, RunConfig(sessions=("dam",)))
        assert result.ok
        assert [r.key for r in result.sessions] == ["dam"]
        assert set(result.profits.per_session) == {"dam"}
        assert abs(result.profits.dam - 853.0) <= 1e-6

    def test_sessions_must_prefix_the_calendar(self, toy):
        assert session_keys(toy) == ["dam", "idm1"]
        with pytest.raises(ValueError, match="prefix"):
            session_keys(toy, ["idm1"])
        with pytest.raises(ValueError, match="prefix"):
            session_keys(toy, ["dam", "idm2"])
        with pytest.raises(ValueError, match="prefix"):
            session_keys(toy, [])

    def test_failed_day_ahead_stops_the_run(self):
        doc = toy_doc()
        doc["network"]["lines"][0]["flowLimit"] = 1.0
        doc["ndres"][0]["pMin"] = [4.0, 6.0, 5.0]
        result = run_vpp(make_scenario(doc))
        assert not result.ok
        assert result.failure == "dam"
        assert result.ledger is None
        assert result.profits.total == 0.0

    def test_failed_session_is_named_and_prior_work_kept(self):
        doc = toy_doc()
        doc["network"]["tradeCap"] = {"b1": 0.0}
        doc["dres"][0]["pMin"] = 3.0
        doc["demands"][0]["tolLo"] = 0.0
        doc["demands"][0]["tolHi"] = 0.0
        doc["forecasts"]["idm"]["1"]["ndresAvail"]["wind"] = [0.0, 0.0, 0.0]
        result = run_vpp(make_scenario(doc))
        assert not result.ok
        assert result.failure == "idm1"
        assert result.sessions[-1].status == "infeasible"
        assert result.ledger is not None  # the day-ahead stage survived
        assert "dam" in result.profits.per_session

    def test_mode_dispatch(self, toy):
        assert run(toy, RunConfig(mode="vpp")).mode == "vpp"
        assert run(toy, RunConfig(mode="nocoord")).mode == "nocoord"
        with pytest.raises(ValueError, match="unknown mode"):
            run(toy, RunConfig(mode="solo"))


class TestSingleAsset:
    def test_isolation_drops_everything_else(self, toy):
        sub = single_asset_scenario(toy, "wind")
        assert sub.network.buses == ("b2",)
        assert sub.network.main_grid_buses == ("b2",)
        assert sub.network.lines == ()
        assert sub.network.trade_cap == {"b2": 50.0}
        assert sub.dres == ()
        assert [a.id for a in sub.ndres] == ["wind"]
        assert sub.demands == ()
        assert set(sub.dam_forecast.ndres_avail) == {"wind"}
        assert set(sub.idm_forecasts[1].ndres_avail) == {"wind"}

    def test_only_generation_assets_can_be_isolated(self, toy):
        with pytest.raises(KeyError, match="not a generation asset"):
            single_asset_scenario(toy, "load")
        with pytest.raises(KeyError, match="not a generation asset"):
            single_asset_scenario(toy, "ghost")

    def test_one_asset_portfolio_gains_nothing_from_coordination(self):
        doc = toy_doc()
        doc["dres"] = []
        doc["demands"] = []
        s = make_scenario(doc)
        vpp = run_vpp(s)
        solo = run_no_coordination(s)
        assert vpp.ok and solo.ok
        assert abs(vpp.profits.total - solo.profits.total) <= 1e-9


class TestNoCoordination:
    def test_aggregate_is_the_sum_of_isolated_runs(self, toy):
        result = run_no_coordination(toy)
        assert result.ok
        assert result.mode == "nocoord"
        assert [aid for aid, _ in result.asset_runs] == ["gen", "wind"]
        assert result.passive_demand_profit == {"load": -180.0}
        expected_dam = sum(r.profits.per_session["dam"]
                           for _, r in result.asset_runs) - 180.0
        assert abs(result.profits.per_session["dam"] - expected_dam) <= 1e-9
        # the unit earns 593 alone, wind 440, the passive load pays 180
        assert abs(result.profits.per_session["dam"] - 853.0) <= 1e-6

    def test_coordination_is_worth_the_band(self, toy):
        vpp = run_vpp(toy)
        solo = run_no_coordination(toy)
        assert vpp.profits.total >= solo.profits.total - 1e-9
        assert abs((vpp.profits.total - solo.profits.total) - 10.0) <= 1e-6

    def test_merged_session_bookkeeping(self, toy):
        result = run_no_coordination(toy)
        dam = result.sessions[0]
        assert dam.key == "dam"
        assert dam.status == "optimal"
        assert dam.n_vars == sum(r.sessions[0].n_vars for _, r in result.asset_runs)
        assert abs(dam.objective - result.profits.per_session["dam"]) <= 1e-9

    def test_passive_demand_pays_day_ahead_prices(self, toy):
        d = toy.demands[0]
        assert passive_demand_profit(toy, d) == -(2 * 30.0 + 2 * 20.0 + 2 * 40.0)


class TestRecompute:
    def test_initial_commitment_changes_the_startup_booking(self):
        doc = toy_doc()
        doc["dres"][0]["initialCommitment"] = "on"
        result = run_vpp(make_scenario(doc))
        assert abs(result.profits.dam - 860.0) <= 1e-6
        assert result.profits.max_recompute_drift() <= 1e-6

    def test_history_steps_must_add_one_session(self, toy):
        result = run_vpp(toy)
        ledger = result.ledger_history[0]
        with pytest.raises(ValueError, match="exactly one session"):
            recompute_profits(toy, [ledger, ledger])


class TestCheckers:
    def test_clean_run_passes_all_checkers(self, toy):
        result = run_vpp(toy)
        assert check_demand_contracts(toy, result.ledger) == []
        assert check_aggregate_balance(toy, result.ledger) == []
        assert check_storage_conservation(toy, result.ledger) == []

    def test_band_violation_is_reported(self, toy):
        ledger = run_vpp(toy).ledger
        bad = dataclasses.replace(
            ledger, demand_p={"load": (2.0, 4.0, 1.5)})  # 4 > 2 * 1.25
        messages = check_demand_contracts(toy, bad)
        assert any("outside band" in m for m in messages)

    def test_ramp_violation_is_reported(self):
        doc = toy_doc()
        doc["demands"][0]["rampUp"] = 0.4
        doc["demands"][0]["rampDown"] = 0.4
        s = make_scenario(doc)
        ledger = run_vpp(s).ledger
        bad = dataclasses.replace(
            ledger, demand_p={"load": (1.5, 2.5, 1.5)})  # steps of 1 > 0.4
        messages = check_demand_contracts(s, bad)
        assert any("ramp-up" in m for m in messages)
        assert any("ramp-down" in m for m in messages)

    def test_energy_floor_violation_is_reported(self, toy):
        ledger = run_vpp(toy).ledger
        bad = dataclasses.replace(
            ledger, demand_p={"load": (1.5, 1.5, 1.5)})  # 4.5 MWh < 6
        messages = check_demand_contracts(toy, bad)
        assert any("below minimum" in m for m in messages)

    def test_imbalance_is_reported(self, toy):
        ledger = run_vpp(toy).ledger
        bad = dataclasses.replace(
            ledger, ndres_p={"wind": (4.0, 6.0, 4.0)})  # 1 MW vanishes at t3
        messages = check_aggregate_balance(toy, bad)
        assert len(messages) == 1
        assert "period 3" in messages[0]

    def test_storage_drift_is_reported(self):
        from test_stu import _stu_scenario

        s = _stu_scenario([5.0, 50.0], [100.0, 0.0])
        ledger = run_vpp(s).ledger
        assert check_storage_conservation(s, ledger) == []
        series = dict(ledger.stu_series["csp"])
        series[ENERGY] = (100.0, 15.0)  # 15 MWh appear from nowhere
        bad = dataclasses.replace(ledger, stu_series={"csp": series})
        messages = check_storage_conservation(s, bad)
        assert any("telescoped" in m for m in messages)

    def test_end_window_violation_is_reported(self):
        from test_stu import _stu_scenario

        s = _stu_scenario([5.0, 50.0], [100.0, 0.0], endAlphaLo=0.3)
        ledger = run_vpp(s).ledger
        series = dict(ledger.stu_series["csp"])
        # telescoping consistent, but the final fill undershoots 0.3*200
        series[CHG] = (50.0, 0.0)
        series[ENERGY] = (50.0, 50.0 - series[DIS][1])
        bad = dataclasses.replace(ledger, stu_series={"csp": series})
        messages = check_storage_conservation(s, bad)
        assert any("outside window" in m for m in messages)


class TestSweep:
    def test_threshold_found_for_a_profitable_challenger(self):
        s = make_scenario(_priced_doc())
        (entry,) = sweep_profile_costs(s, "load", "shift", max_cost=100.0)
        assert entry.status == "threshold"
        # the shifted profile saves exactly 10 of purchase value
        assert 10.0 - entry.resolution <= entry.threshold <= 10.0

    def test_choice_flips_around_the_threshold(self):
        s = make_scenario(_priced_doc())
        (entry,) = sweep_profile_costs(s, "load", "shift", max_cost=100.0)
        doc = _priced_doc()
        doc["demands"][0]["profiles"][1]["cost"] = entry.threshold
        assert chosen_profiles(make_scenario(doc))[0]["load"] == "shift"
        doc["demands"][0]["profiles"][1]["cost"] = entry.threshold + 1.0
        assert chosen_profiles(make_scenario(doc))[0]["load"] == "flat"

    def test_worthless_challenger_is_never_picked(self, toy):
        # at toy prices the shift costs 10 more than the flat profile
        (entry,) = sweep_profile_costs(toy, "load", "shift")
        assert entry.status == "never"
        assert entry.threshold is None

    def test_cap_below_the_threshold_reports_above_max(self):
        s = make_scenario(_priced_doc())
        (entry,) = sweep_profile_costs(s, "load", "shift", max_cost=5.0)
        assert entry.status == "above_max"

    def test_unknown_pair_rejected(self, toy):
        with pytest.raises(KeyError, match="no non-default profile"):
            sweep_profile_costs(toy, "load", "nothere")
        with pytest.raises(ValueError, match="resolution"):
            sweep_profile_costs(toy, resolution=0.0)

    def test_cost_grid_records_choices_and_objectives(self):
        s = make_scenario(_priced_doc())
        free, taxed = evaluate_cost_grid(
            s, [{}, {("load", "shift"): 50.0}])
        assert free.chosen == {"load": "shift"}
        assert taxed.chosen == {"load": "flat"}
        assert abs(free.objective - 853.0) <= 1e-6
        assert abs(taxed.objective - 843.0) <= 1e-6

    def test_failed_probe_is_surfaced(self):
        doc = toy_doc()
        doc["network"]["lines"][0]["flowLimit"] = 1.0
        doc["ndres"][0]["pMin"] = [4.0, 6.0, 5.0]
        with pytest.raises(RuntimeError, match="day-ahead solve failed"):
            chosen_profiles(make_scenario(doc))
