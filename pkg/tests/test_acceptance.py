"""End-to-end acceptance gates on the shipped study days and randomized
instances.

Nine checks, one test each: clean and fast solves of both shipped days,
agreement of the day-ahead optimizer with exhaustive enumeration,
conversion-curve fidelity and agreement of the two SOS-2 routes, storage
bookkeeping, demand contracts, the value of coordination, sharp
profile-payment thresholds, inert no-news sessions, and price
monotonicity.
"""

from __future__ import annotations

import dataclasses
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import enumerate_dam_optimum, make_scenario
from vppopt.casestudy import equal_information_variant
from vppopt.dam import assemble_dam
from vppopt.milp import Sos2EnumerationAdapter, solve
from vppopt.orchestrator import (
    RunConfig,
    check_aggregate_balance,
    check_demand_contracts,
    check_storage_conservation,
    chosen_profiles,
    run,
    sweep_profile_costs,
)
from vppopt.scenario import load_scenario
from vppopt.stu import CHG, DIS, ENERGY, PB_ON, POWER, PPB, eval_pb_oracle, pb_curve
from vppopt.synth import (
    random_piecewise_model,
    random_seller_scenario,
    random_stu_scenario,
)

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"
RUNTIME_BUDGET_S = 10.0  # full day-ahead-plus-intraday run, per shipped day


@pytest.fixture(scope="module")
def study():
    """Both shipped days solved in coordinated mode, with wall times."""
    out = {}
    for name in ("clear", "cloudy"):
        s = load_scenario(SCENARIO_DIR / f"{name}.json")
        t0 = time.perf_counter()
        result = run(s, RunConfig(mode="vpp"))
        out[name] = (s, result, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def baselines():
    """Both shipped days with every asset bidding alone."""
    return {name: run(load_scenario(SCENARIO_DIR / f"{name}.json"),
                      RunConfig(mode="nocoord"))
            for name in ("clear", "cloudy")}


def _tiny_doc(prices: tuple[float, ...], initial: str) -> dict:
    """One bus, one plant, one two-profile demand over three periods --
    small enough to enumerate every commitment pattern and profile choice."""
    return {
        "name": "tiny",
        "network": {"buses": ["b1"], "mainGridBuses": ["b1"], "lines": [],
                    "tradeCap": {"b1": 100.0}},
        "dres": [{"id": "gen", "bus": "b1", "pMin": 2.0, "pMax": 8.0,
                  "variableCost": 12.0, "startupCost": 5.0, "shutdownCost": 4.0,
                  "initialCommitment": initial}],
        "ndres": [], "stu": [],
        "demands": [{"id": "load", "bus": "b1", "profiles": [
            {"id": "steady", "power": [3.0, 3.0, 3.0], "cost": 0.0, "default": True},
            {"id": "late", "power": [2.0, 3.0, 4.0], "cost": 6.0}],
            "minEnergy": 8.0, "tolLo": 0.2, "tolHi": 0.2,
            "rampDown": 10.0, "rampUp": 10.0}],
        "calendar": {"T": 3, "dtHours": 1.0, "damPrices": list(prices),
                     "sessions": []},
        "forecasts": {"dam": {"ndresAvail": {}, "stuAvail_th": {}}, "idm": {}},
    }


def _pair_contest(s, demand_id: str, profile_id: str, cost: float):
    """Restrict one demand to its default-versus-challenger contest with
    the challenger at the given payment; an independent re-check of the
    sweep's bisection probes."""
    demands = []
    for d in s.demands:
        if d.id != demand_id:
            demands.append(d)
            continue
        profiles = tuple(
            dataclasses.replace(p, cost=cost if p.id == profile_id else p.cost)
            for p in d.profiles if p.default or p.id == profile_id)
        demands.append(dataclasses.replace(d, profiles=profiles))
    return dataclasses.replace(s, demands=tuple(demands))


class TestSolveQuality:
    def test_shipped_days_solve_clean_within_budget(self, study):
        """Every session of both days is optimal with zero verified
        violations at 1e-6, inside the per-day runtime budget."""
        for name, (s, result, wall) in study.items():
            assert result.ok, f"{name}: run stopped at {result.failure}"
            assert len(result.sessions) == 1 + len(s.calendar.sessions)
            for sess in result.sessions:
                assert sess.status == "optimal", f"{name}/{sess.key}: {sess.status}"
                assert sess.violations == (), \
                    f"{name}/{sess.key}: {sess.violations[:3]}"
            assert wall < RUNTIME_BUDGET_S, f"{name}: {wall:.2f}s"

    def test_day_ahead_matches_exhaustive_enumeration(self):
        """Branch-and-bound agrees with brute force over every commitment
        pattern and profile choice to 1e-6."""
        for prices, initial in (((30.0, 5.0, 45.0), "off"),
                                ((12.0, 55.0, 8.0), "on"),
                                ((40.0, 41.0, 6.0), "off")):
            s = make_scenario(_tiny_doc(prices, initial))
            model, _ = assemble_dam(s)
            sol = solve(model)
            assert sol.status == "optimal"
            assert abs(sol.objective - enumerate_dam_optimum(s)) <= 1e-6

    def test_conversion_curve_holds_and_sos2_routes_agree(self):
        """On 50 solved storage-unit instances the electrical output sits
        on the thermal conversion curve to 1e-6 whenever the block runs;
        on 100 random curves the reformulation and segment-enumeration
        routes produce the same optimum to 1e-6."""
        rng = np.random.default_rng(20260814)
        for _ in range(50):
            s = random_stu_scenario(rng)
            model, reg = assemble_dam(s)
            sol = solve(model)
            assert sol.status == "optimal"
            curve = pb_curve(s.stu[0])
            for t in range(1, s.n_periods + 1):
                p = float(sol.values[reg.id(POWER, "unit", t)])
                if sol.values[reg.id(PB_ON, "unit", t)] > 0.5:
                    ppb = float(sol.values[reg.id(PPB, "unit", t)])
                    assert abs(p - eval_pb_oracle(curve, ppb)) <= 1e-6
                else:
                    assert abs(p) <= 1e-6

        rng = np.random.default_rng(7)
        exact = Sos2EnumerationAdapter()
        for _ in range(100):
            m = random_piecewise_model(rng)
            a = solve(m)
            b = solve(m, adapter=exact)
            assert a.status == "optimal" and b.status == "optimal"
            assert abs(a.objective - b.objective) <= 1e-6


class TestFinalSchedules:
    def test_storage_books_balance_into_end_window(self, study):
        """Settled storage trajectories obey the charge/discharge
        recurrence period by period and telescoped to 1e-6, and the final
        fill lands inside the contracted end window."""
        for name, (s, result, _) in study.items():
            for a in s.stu:
                series = result.ledger.stu_series[a.id]
                e = np.asarray(series[ENERGY])
                chg = np.asarray(series[CHG])
                dis = np.asarray(series[DIS])
                step = a.charge_eff * chg * s.dt - dis * s.dt / a.discharge_eff
                prev = np.concatenate([[a.initial_energy], e[:-1]])
                assert np.max(np.abs(e - prev - step)) <= 1e-6, name
                assert abs(e[-1] - a.initial_energy - step.sum()) <= 1e-6, name
                cap_end = a.storage_cap[-1]
                assert a.end_alpha_lo * cap_end - 1e-6 <= e[-1] \
                    <= a.end_alpha_hi * cap_end + 1e-6, name
            assert check_storage_conservation(s, result.ledger) == []

    def test_demand_contracts_hold(self, study):
        """Settled consumption stays inside each demand's tolerance band,
        ramp limits and energy floor, re-checked from the raw series."""
        for name, (s, result, _) in study.items():
            assert check_demand_contracts(s, result.ledger) == [], name
            assert check_aggregate_balance(s, result.ledger) == [], name
            for d in s.demands:
                energy = sum(result.ledger.demand_p[d.id]) * s.dt
                assert energy >= d.min_energy - 1e-6, f"{name}/{d.id}"


class TestEconomics:
    def test_coordination_beats_isolated_operation(self, study, baselines):
        """The coordinated portfolio earns at least the sum of isolated
        asset runs on both days, and the advantage is relatively larger on
        the cloudy day."""
        gaps = {}
        for name in ("clear", "cloudy"):
            assert baselines[name].ok
            vpp = study[name][1].profits.total
            solo = baselines[name].profits.total
            assert vpp >= solo - 1e-6, f"{name}: {vpp} < {solo}"
            gaps[name] = (vpp - solo) / abs(solo)
        assert gaps["cloudy"] > gaps["clear"]

    def test_profile_cost_thresholds_are_sharp(self, study):
        """Every alternative consumption profile has a finite payment
        threshold; independent re-solves pick it at the threshold and at
        half of it, and drop it one unit above."""
        s = study["clear"][0]
        entries = sweep_profile_costs(s, max_cost=1200.0, resolution=1.0)
        non_default = sorted((d.id, p.id) for d in s.demands
                             for p in d.profiles if not p.default)
        assert sorted((e.demand_id, e.profile_id) for e in entries) == non_default
        for e in entries:
            assert e.status == "threshold", f"{e.demand_id}/{e.profile_id}: {e.status}"
            assert 0.0 < e.threshold < 1200.0
            for cost, want in ((e.threshold / 2.0, True),
                               (e.threshold, True),
                               (e.threshold + 1.0, False)):
                probe = _pair_contest(s, e.demand_id, e.profile_id, cost)
                chosen, _ = chosen_profiles(probe)
                picked = chosen[e.demand_id] == e.profile_id
                assert picked is want, \
                    f"{e.demand_id}/{e.profile_id} at {cost:.3f}: picked={picked}"

    def test_no_news_sessions_change_nothing(self, study):
        """When every session repeats the day-ahead prices and forecasts,
        all intraday adjustments are zero and each session objective is 0
        to 1e-6."""
        for name in ("clear", "cloudy"):
            s = equal_information_variant(study[name][0], zero_tolerance=True)
            result = run(s, RunConfig(mode="vpp"))
            assert result.ok, f"{name}: run stopped at {result.failure}"
            for key, value in result.profits.per_session.items():
                if key != "dam":
                    assert abs(value) <= 1e-6, f"{name}/{key}: {value}"
            for prev, cur in zip(result.ledger_history, result.ledger_history[1:]):
                jump = max(abs(cur.cumulative_trade(t) - prev.cumulative_trade(t))
                           for t in range(1, s.n_periods + 1))
                assert jump <= 1e-6, name
                for aid, series in prev.dres_p.items():
                    assert np.allclose(cur.dres_p[aid], series, atol=1e-6)
                for aid, series in prev.ndres_p.items():
                    assert np.allclose(cur.ndres_p[aid], series, atol=1e-6)
                for did, series in prev.demand_p.items():
                    assert np.allclose(cur.demand_p[did], series, atol=1e-6)

    def test_price_lift_never_lowers_day_ahead_profit(self):
        """Lifting all day-ahead prices by 10 EUR/MWh never lowers the
        day-ahead optimum of a net-selling portfolio (20 random draws)."""
        rng = np.random.default_rng(99)
        for _ in range(20):
            s = random_seller_scenario(rng)
            base_model, _ = assemble_dam(s)
            base = solve(base_model)
            cal = dataclasses.replace(
                s.calendar,
                dam_prices=tuple(p + 10.0 for p in s.calendar.dam_prices))
            lifted_model, _ = assemble_dam(dataclasses.replace(s, calendar=cal))
            lifted = solve(lifted_model)
            assert base.status == "optimal" and lifted.status == "optimal"
            assert lifted.objective >= base.objective - 1e-6
