"""Experiment pipeline: day-ahead solve, sequential intraday sessions,
the no-coordination baseline, and the profile-cost sweep.

A VPP run solves the day-ahead model, seeds the ledger, then walks the
calendar's intraday sessions in order, each with its own forecast set.
Every solved session is independently re-verified. The no-coordination
baseline gives each asset its own isolated market run (demands stay
passive on their default profile), so the two modes are comparable
profit-for-profit. The sweep searches, per demand profile, the largest
payment at which the optimizer still picks it over the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from vppopt import dam as dam_mod
from vppopt import idm as idm_mod
from vppopt import stu as stu_mod
from vppopt.idm import LedgerState, apply_idm, assemble_idm, ledger_from_dam
from vppopt.milp import (
    MilpModel,
    Solution,
    SolveOptions,
    SolverAdapter,
    Violation,
    solve,
    verify,
)
from vppopt.registry import VariableRegistry
from vppopt.scenario import (
    DemandAsset,
    DemandProfile,
    ForecastSet,
    Network,
    Scenario,
)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "vpp"  # vpp | nocoord
    sessions: tuple[str, ...] | None = None  # prefix of ("dam", "idm1", ...); None = all
    options: SolveOptions = field(default_factory=SolveOptions)
    out_dir: str | None = None


@dataclass(frozen=True)
class SessionResult:
    key: str  # "dam" or "idm<k>"
    status: str
    objective: float | None
    violations: tuple[Violation, ...]
    runtime_s: float
    n_vars: int
    n_constraints: int


@dataclass(frozen=True)
class ProfitBreakdown:
    """Solver-reported profits next to an independent recomputation from
    the settled schedules and prices."""

    per_session: dict[str, float]
    recomputed: dict[str, float]

    @property
    def dam(self) -> float:
        return self.per_session.get("dam", 0.0)

    @property
    def total(self) -> float:
        return sum(self.per_session.values())

    def max_recompute_drift(self) -> float:
        keys = set(self.per_session) | set(self.recomputed)
        return max((abs(self.per_session.get(k, 0.0) - self.recomputed.get(k, 0.0))
                    for k in keys), default=0.0)


@dataclass(frozen=True)
class RunResult:
    mode: str
    scenario_name: str
    sessions: tuple[SessionResult, ...]
    ledger: LedgerState | None
    ledger_history: tuple[LedgerState, ...]
    profits: ProfitBreakdown
    failure: str | None = None  # session key that stopped the run
    asset_runs: tuple[tuple[str, "RunResult"], ...] = ()
    passive_demand_profit: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failure is None


def session_keys(s: Scenario, requested: Sequence[str] | None = None) -> list[str]:
    """Resolve the session list; a request must be a prefix of the
    calendar's order (day-ahead first)."""
    full = ["dam"] + [f"idm{sess.k}" for sess in s.calendar.sessions]
    if requested is None:
        return full
    requested = list(requested)
    if requested != full[:len(requested)] or not requested:
        raise ValueError(
            f"sessions {requested} must be a prefix of the calendar order {full}")
    return requested


# ---------------------------------------------------------------------------
# Profit recomputation (independent of solver objective values)
# ---------------------------------------------------------------------------

def _commitment_costs(u: Sequence[int], prev: Sequence[int] | int, startup: float,
                      shutdown: float, periods: Sequence[int]) -> float:
    """Start/stop cost of a commitment pattern. ``prev`` is either the
    initial status (temporal transitions, day-ahead) or the prior plan per
    period (recommitment deltas, intraday)."""
    total = 0.0
    for i, t in enumerate(periods):
        if isinstance(prev, int):
            before = prev if i == 0 else u[t - 2]
        else:
            before = prev[t - 1]
        delta = u[t - 1] - before
        if delta > 0:
            total += startup
        elif delta < 0:
            total += shutdown
    return total


def recompute_dam_profit(s: Scenario, ledger: LedgerState) -> float:
    """Day-ahead profit implied by the ledger's day-ahead stage."""
    dt = s.dt
    revenue = sum(price * trade for price, trade
                  in zip(s.calendar.dam_prices, ledger.dam_trade)) * dt
    cost = 0.0
    periods = range(1, s.n_periods + 1)
    for a in s.dres:
        cost += a.variable_cost * dt * sum(ledger.dres_p[a.id])
        cost += _commitment_costs(ledger.dres_u[a.id], 1 if a.initial_on else 0,
                                  a.startup_cost, a.shutdown_cost, periods)
    for d in s.demands:
        cost += d.profile(ledger.selected_profiles[d.id]).cost
    return revenue - cost


def recompute_idm_profit(s: Scenario, before: LedgerState, after: LedgerState,
                         k: int) -> float:
    """Session profit from the schedules it changed."""
    sess = s.calendar.session(k)
    tau = sess.first_period
    dt = s.dt
    trade = after.idm_trades[k]
    revenue = sum(sess.prices[t - tau] * trade[t - 1] * dt
                  for t in range(tau, s.n_periods + 1))
    cost = 0.0
    window = range(tau, s.n_periods + 1)
    for a in s.dres:
        for t in window:
            delta = after.dres_p[a.id][t - 1] - before.dres_p[a.id][t - 1]
            cost += a.variable_cost * delta * dt
        cost += _commitment_costs(after.dres_u[a.id], before.dres_u[a.id],
                                  a.startup_cost, a.shutdown_cost, window)
    return revenue - cost


def recompute_profits(s: Scenario, history: Sequence[LedgerState]) -> dict[str, float]:
    out = {"dam": recompute_dam_profit(s, history[0])}
    for before, after in zip(history, history[1:]):
        added = set(after.idm_trades) - set(before.idm_trades)
        if len(added) != 1:
            raise ValueError("ledger history steps must add exactly one session")
        k = added.pop()
        out[f"idm{k}"] = recompute_idm_profit(s, before, after, k)
    return out


# ---------------------------------------------------------------------------
# VPP pipeline
# ---------------------------------------------------------------------------

def _solve_session(model: MilpModel, options: SolveOptions,
                   adapter: SolverAdapter | None, key: str) -> tuple[Solution, SessionResult]:
    sol = solve(model, options, adapter)
    violations: tuple[Violation, ...] = ()
    if sol.values is not None:
        violations = tuple(verify(model, sol, options.feas_tol))
    result = SessionResult(key=key, status=sol.status, objective=sol.objective,
                           violations=violations, runtime_s=sol.runtime_s,
                           n_vars=model.n_vars, n_constraints=model.n_constraints)
    return sol, result


def run_vpp(s: Scenario, cfg: RunConfig | None = None,
            adapter: SolverAdapter | None = None) -> RunResult:
    """Day-ahead solve plus the configured intraday sessions in order.

    Stops at the first session that fails to produce an assignment and
    marks it; completed sessions keep their results.
    """
    cfg = cfg or RunConfig()
    keys = session_keys(s, cfg.sessions)
    results: list[SessionResult] = []
    history: list[LedgerState] = []

    model, reg = dam_mod.assemble_dam(s)
    sol, res = _solve_session(model, cfg.options, adapter, "dam")
    results.append(res)
    if sol.values is None:
        return RunResult(mode="vpp", scenario_name=s.name, sessions=tuple(results),
                         ledger=None, ledger_history=(),
                         profits=ProfitBreakdown({}, {}), failure="dam")
    ledger = ledger_from_dam(s, reg, sol)
    history.append(ledger)

    failure = None
    for key in keys[1:]:
        k = int(key[3:])
        model, reg = assemble_idm(s, ledger, k)
        sol, res = _solve_session(model, cfg.options, adapter, key)
        results.append(res)
        if sol.values is None:
            failure = key
            break
        ledger = apply_idm(ledger, s, k, reg, sol)
        history.append(ledger)

    profits = ProfitBreakdown(per_session=dict(ledger.objectives),
                              recomputed=recompute_profits(s, history))
    return RunResult(mode="vpp", scenario_name=s.name, sessions=tuple(results),
                     ledger=ledger, ledger_history=tuple(history),
                     profits=profits, failure=failure)


# ---------------------------------------------------------------------------
# No-coordination baseline
# ---------------------------------------------------------------------------

def single_asset_scenario(s: Scenario, asset_id: str) -> Scenario:
    """Isolate one generation asset: its own bus becomes the only bus and
    the sole coupling point carrying the full trade capacity; the rest of
    the portfolio disappears. Network limits are intentionally absent."""
    kind, bus = None, ""
    for group, name in ((s.dres, "dres"), (s.ndres, "ndres"), (s.stu, "stu")):
        for a in group:
            if a.id == asset_id:
                kind, bus = name, a.bus
    if kind is None:
        raise KeyError(f"{asset_id!r} is not a generation asset")
    total_cap = sum(s.network.trade_cap.values())
    net = Network(buses=(bus,), main_grid_buses=(bus,), lines=(),
                  trade_cap={bus: total_cap})

    def filter_forecast(fc: ForecastSet) -> ForecastSet:
        return ForecastSet(
            ndres_avail={asset_id: fc.ndres_avail[asset_id]} if kind == "ndres" else {},
            stu_avail={asset_id: fc.stu_avail[asset_id]} if kind == "stu" else {},
        )

    return replace(
        s,
        name=f"{s.name}:{asset_id}" if s.name else asset_id,
        network=net,
        dres=tuple(a for a in s.dres if a.id == asset_id),
        ndres=tuple(a for a in s.ndres if a.id == asset_id),
        stu=tuple(a for a in s.stu if a.id == asset_id),
        demands=(),
        dam_forecast=filter_forecast(s.dam_forecast),
        idm_forecasts={k: filter_forecast(fc) for k, fc in s.idm_forecasts.items()},
    )


def passive_demand_profit(s: Scenario, d: DemandAsset) -> float:
    """A passive demand buys its default profile at day-ahead prices; its
    contribution to the aggregate is the negative purchase cost."""
    profile = d.default_profile()
    return -sum(price * p for price, p
                in zip(s.calendar.dam_prices, profile.power)) * s.dt


def run_no_coordination(s: Scenario, cfg: RunConfig | None = None,
                        adapter: SolverAdapter | None = None) -> RunResult:
    """Every asset bids alone; demands stay passive on the default profile.

    Each generation asset gets an isolated single-bus run over the same
    calendar and its own forecasts; aggregate profit is the sum of the
    individual outcomes plus the passive demand purchase costs (booked at
    the day-ahead stage).
    """
    cfg = cfg or RunConfig()
    keys = session_keys(s, cfg.sessions)
    sub_cfg = replace(cfg, mode="vpp")
    asset_runs: list[tuple[str, RunResult]] = []
    failure = None
    for a in s.dres + s.ndres + s.stu:
        sub = single_asset_scenario(s, a.id)
        run = run_vpp(sub, sub_cfg, adapter)
        asset_runs.append((a.id, run))
        if not run.ok and failure is None:
            failure = run.failure

    demand_profit = {d.id: passive_demand_profit(s, d) for d in s.demands}

    per_session: dict[str, float] = {}
    recomputed: dict[str, float] = {}
    for key in keys:
        contributions = [run.profits.per_session.get(key) for _, run in asset_runs]
        if any(c is None for c in contributions):
            continue
        per_session[key] = float(sum(contributions))
        recomputed[key] = float(sum(run.profits.recomputed.get(key, 0.0)
                                    for _, run in asset_runs))
        if key == "dam":
            per_session[key] += sum(demand_profit.values())
            recomputed[key] += sum(demand_profit.values())

    merged_sessions = []
    for i, key in enumerate(keys):
        parts = [run.sessions[i] for _, run in asset_runs if len(run.sessions) > i]
        if not parts:
            break
        status = "optimal"
        for p in parts:
            if p.status != "optimal":
                status = p.status
        merged_sessions.append(SessionResult(
            key=key, status=status,
            objective=per_session.get(key),
            violations=tuple(v for p in parts for v in p.violations),
            runtime_s=sum(p.runtime_s for p in parts),
            n_vars=sum(p.n_vars for p in parts),
            n_constraints=sum(p.n_constraints for p in parts)))

    return RunResult(mode="nocoord", scenario_name=s.name,
                     sessions=tuple(merged_sessions), ledger=None, ledger_history=(),
                     profits=ProfitBreakdown(per_session=per_session, recomputed=recomputed),
                     failure=failure, asset_runs=tuple(asset_runs),
                     passive_demand_profit=demand_profit)


def run(s: Scenario, cfg: RunConfig | None = None,
        adapter: SolverAdapter | None = None) -> RunResult:
    cfg = cfg or RunConfig()
    if cfg.mode == "vpp":
        return run_vpp(s, cfg, adapter)
    if cfg.mode == "nocoord":
        return run_no_coordination(s, cfg, adapter)
    raise ValueError(f"unknown mode {cfg.mode!r}")


# ---------------------------------------------------------------------------
# Profile-cost sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdEntry:
    demand_id: str
    profile_id: str
    status: str  # "threshold" | "never" | "above_max"
    threshold: float | None
    resolution: float


@dataclass(frozen=True)
class GridPoint:
    costs: dict[tuple[str, str], float]
    chosen: dict[str, str]
    objective: float


def _with_profile_costs(s: Scenario, costs: Mapping[tuple[str, str], float]) -> Scenario:
    demands = []
    for d in s.demands:
        profiles = tuple(
            replace(p, cost=costs.get((d.id, p.id), p.cost)) for p in d.profiles)
        demands.append(replace(d, profiles=profiles))
    return replace(s, demands=tuple(demands))


def _restrict_to_pair(s: Scenario, demand_id: str, profile_id: str) -> Scenario:
    """Keep only the default profile and one challenger for a demand, so
    the sweep measures the challenger's value against the default."""
    demands = []
    for d in s.demands:
        if d.id == demand_id:
            keep = tuple(p for p in d.profiles if p.default or p.id == profile_id)
            demands.append(replace(d, profiles=keep))
        else:
            demands.append(d)
    return replace(s, demands=tuple(demands))


def chosen_profiles(s: Scenario, options: SolveOptions | None = None,
                    adapter: SolverAdapter | None = None) -> tuple[dict[str, str], float]:
    """Solve the day-ahead stage and read the selected profile per demand."""
    model, reg = dam_mod.assemble_dam(s)
    sol = solve(model, options, adapter)
    if sol.values is None:
        raise RuntimeError(f"day-ahead solve failed: {sol.status} {sol.message}")
    out = {}
    for d in s.demands:
        for p in d.profiles:
            if sol.values[reg.id(dam_mod.DEM_U, f"{d.id}/{p.id}")] > 0.5:
                out[d.id] = p.id
    return out, float(sol.objective)


def evaluate_cost_grid(s: Scenario, grid: Sequence[Mapping[tuple[str, str], float]],
                       options: SolveOptions | None = None,
                       adapter: SolverAdapter | None = None) -> list[GridPoint]:
    """Record the day-ahead profile choice at each cost assignment."""
    out = []
    for costs in grid:
        chosen, objective = chosen_profiles(_with_profile_costs(s, costs), options, adapter)
        out.append(GridPoint(costs=dict(costs), chosen=chosen, objective=objective))
    return out


def sweep_profile_costs(s: Scenario, demand_id: str | None = None,
                        profile_id: str | None = None, max_cost: float = 1000.0,
                        resolution: float = 1.0,
                        options: SolveOptions | None = None,
                        adapter: SolverAdapter | None = None) -> list[ThresholdEntry]:
    """Largest payment at which a non-default profile is still selected.

    Each (demand, profile) pair is swept in a head-to-head contest against
    that demand's default profile, bisecting the cost to the requested
    resolution. Selection is downward closed in the cost, which is what
    makes the bisection sound.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    pairs: list[tuple[str, str]] = []
    for d in s.demands:
        if demand_id is not None and d.id != demand_id:
            continue
        for p in d.profiles:
            if p.default or (profile_id is not None and p.id != profile_id):
                continue
            pairs.append((d.id, p.id))
    if (demand_id is not None or profile_id is not None) and not pairs:
        raise KeyError(f"no non-default profile matches demand={demand_id} "
                       f"profile={profile_id}")

    out = []
    for did, pid in pairs:
        contest = _restrict_to_pair(s, did, pid)

        def picked(cost: float) -> bool:
            probe = _with_profile_costs(contest, {(did, pid): cost})
            chosen, _ = chosen_profiles(probe, options, adapter)
            return chosen[did] == pid

        if not picked(0.0):
            out.append(ThresholdEntry(did, pid, "never", None, resolution))
            continue
        if picked(max_cost):
            out.append(ThresholdEntry(did, pid, "above_max", None, resolution))
            continue
        lo, hi = 0.0, max_cost  # picked at lo, not at hi
        while hi - lo > resolution:
            mid = (lo + hi) / 2.0
            if picked(mid):
                lo = mid
            else:
                hi = mid
        out.append(ThresholdEntry(did, pid, "threshold", lo, resolution))
    return out


# ---------------------------------------------------------------------------
# Independent post-hoc checkers
# ---------------------------------------------------------------------------

def check_demand_contracts(s: Scenario, ledger: LedgerState,
                           tol: float = 1e-6) -> list[str]:
    """Re-check every demand's settled consumption against its contract:
    tolerance band around the selected profile, ramp limits, and the
    minimum-energy floor. Independent of any solver artifact."""
    out = []
    dt = s.dt
    for d in s.demands:
        profile = d.profile(ledger.selected_profiles[d.id])
        series = ledger.demand_p[d.id]
        for t in range(1, s.n_periods + 1):
            ref = profile.power[t - 1]
            lo = (1.0 - d.tol_lo[t - 1]) * ref
            hi = (1.0 + d.tol_hi[t - 1]) * ref
            if not lo - tol <= series[t - 1] <= hi + tol:
                out.append(f"{d.id}: period {t} consumption {series[t - 1]:.6f} "
                           f"outside band [{lo:.6f}, {hi:.6f}]")
        for t in range(2, s.n_periods + 1):
            step = series[t - 1] - series[t - 2]
            if step > d.ramp_up * dt + tol:
                out.append(f"{d.id}: period {t} ramp-up {step:.6f} exceeds "
                           f"{d.ramp_up * dt:.6f}")
            if -step > d.ramp_down * dt + tol:
                out.append(f"{d.id}: period {t} ramp-down {-step:.6f} exceeds "
                           f"{d.ramp_down * dt:.6f}")
        energy = sum(series) * dt
        if energy < d.min_energy - tol:
            out.append(f"{d.id}: energy {energy:.6f} MWh below minimum "
                       f"{d.min_energy:.6f}")
    return out


def check_aggregate_balance(s: Scenario, ledger: LedgerState,
                            tol: float = 1e-6) -> list[str]:
    """Generation minus consumption must equal the committed trade in
    every period of the final schedules."""
    out = []
    for t in range(1, s.n_periods + 1):
        gen = sum(ledger.dres_p[a.id][t - 1] for a in s.dres)
        gen += sum(ledger.ndres_p[a.id][t - 1] for a in s.ndres)
        gen += sum(ledger.stu_series[a.id][stu_mod.POWER][t - 1] for a in s.stu)
        load = sum(ledger.demand_p[d.id][t - 1] for d in s.demands)
        residual = gen - load - ledger.cumulative_trade(t)
        if abs(residual) > tol:
            out.append(f"period {t}: generation {gen:.6f} - load {load:.6f} "
                       f"!= trade {ledger.cumulative_trade(t):.6f} "
                       f"(residual {residual:.3e})")
    return out


def check_storage_conservation(s: Scenario, ledger: LedgerState,
                               tol: float = 1e-6) -> list[str]:
    """Telescoped storage balance and end-of-horizon window on the final
    storage trajectories."""
    out = []
    dt = s.dt
    for a in s.stu:
        series = ledger.stu_series[a.id]
        e = series[stu_mod.ENERGY]
        chg = series[stu_mod.CHG]
        dis = series[stu_mod.DIS]
        expected = a.initial_energy + sum(
            a.charge_eff * chg[t] * dt - dis[t] * dt / a.discharge_eff
            for t in range(s.n_periods))
        if abs(e[-1] - expected) > tol:
            out.append(f"{a.id}: end energy {e[-1]:.6f} != telescoped {expected:.6f}")
        cap_end = a.storage_cap[-1]
        if not (a.end_alpha_lo * cap_end - tol <= e[-1] <= a.end_alpha_hi * cap_end + tol):
            out.append(f"{a.id}: end energy {e[-1]:.6f} outside window "
                       f"[{a.end_alpha_lo * cap_end:.6f}, {a.end_alpha_hi * cap_end:.6f}]")
    return out
