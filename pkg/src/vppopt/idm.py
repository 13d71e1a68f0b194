"""Intraday session formulation and the cross-session ledger.

Each intraday session re-optimizes delivery periods at or after its first
covered period tau, taking everything earlier as settled. The
:class:`LedgerState` carries the accumulated outcome: the day-ahead trade,
every prior session's trade adjustments, the selected demand profiles and
the rolling current schedule of every asset. A session model maximizes
the value of trade adjustments at session prices minus the cost of
dispatch changes, subject to the same physical network, asset and demand
constraints, re-imposed on the receding window with initial conditions
read from the ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from vppopt import stu as stu_mod
from vppopt.dam import (
    ANGLE,
    DEM_P,
    DEM_U,
    DRES_C0,
    DRES_C1,
    DRES_P,
    DRES_U,
    DRES_V,
    DRES_W,
    FLOW,
    NDRES_P,
    TRADE_BUS,
    TRADE_DAM,
    build_balance_constraints,
    build_dc_flow_constraints,
    trade_upper_bound,
)
from vppopt.milp import MilpModel, Solution
from vppopt.registry import VariableRegistry
from vppopt.scenario import ForecastSet, Scenario

IDM_TRADE = "idm_trade"  # session trade adjustment [MW], free sign
DRES_DP = "dres_dp"      # dispatch change vs the previous session [MW]

STU_ROLES = (stu_mod.PSF, stu_mod.CHG, stu_mod.DIS, stu_mod.UPLUS, stu_mod.ENERGY,
             stu_mod.PPB, stu_mod.PB_ON, stu_mod.PB_START, stu_mod.POWER)


@dataclass(frozen=True)
class LedgerState:
    """Accumulated market position and current schedules after a session.

    Series span the full horizon; session trade series are zero outside
    their window. Schedules hold the latest decision for every period:
    each session overwrites its window, earlier periods stay settled.
    """

    n_periods: int
    dam_trade: tuple[float, ...]
    idm_trades: dict[int, tuple[float, ...]]
    selected_profiles: dict[str, str]
    demand_p: dict[str, tuple[float, ...]]
    dres_p: dict[str, tuple[float, ...]]
    dres_u: dict[str, tuple[int, ...]]
    ndres_p: dict[str, tuple[float, ...]]
    stu_series: dict[str, dict[str, tuple[float, ...]]]
    objectives: dict[str, float]

    def cumulative_trade(self, t: int) -> float:
        """Committed trade at period t across the day-ahead stage and all
        recorded sessions."""
        return self.dam_trade[t - 1] + sum(series[t - 1] for series in self.idm_trades.values())

    def cumulative_trade_series(self) -> tuple[float, ...]:
        return tuple(self.cumulative_trade(t) for t in range(1, self.n_periods + 1))

    def total_objective(self) -> float:
        return sum(self.objectives.values())


def _binary(x: float) -> int:
    return 1 if x > 0.5 else 0


def ledger_from_dam(s: Scenario, reg: VariableRegistry, sol: Solution) -> LedgerState:
    """Seed the ledger from a solved day-ahead model."""
    if sol.values is None:
        raise ValueError(f"day-ahead solution has status {sol.status!r}, no assignment")
    x = sol.values
    periods = range(1, s.n_periods + 1)
    selected: dict[str, str] = {}
    for d in s.demands:
        chosen = [p.id for p in d.profiles if _binary(x[reg.id(DEM_U, f"{d.id}/{p.id}")])]
        if len(chosen) != 1:
            raise ValueError(f"demand {d.id} selected {len(chosen)} profiles")
        selected[d.id] = chosen[0]
    return LedgerState(
        n_periods=s.n_periods,
        dam_trade=tuple(reg.values(x, TRADE_DAM, "vpp", periods)),
        idm_trades={},
        selected_profiles=selected,
        demand_p={d.id: tuple(reg.values(x, DEM_P, d.id, periods)) for d in s.demands},
        dres_p={a.id: tuple(reg.values(x, DRES_P, a.id, periods)) for a in s.dres},
        dres_u={a.id: tuple(_binary(v) for v in reg.values(x, DRES_U, a.id, periods))
                for a in s.dres},
        ndres_p={a.id: tuple(reg.values(x, NDRES_P, a.id, periods)) for a in s.ndres},
        stu_series={a.id: {role: tuple(reg.values(x, role, a.id, periods))
                           for role in STU_ROLES} for a in s.stu},
        objectives={"dam": float(sol.objective)},
    )


def apply_idm(ledger: LedgerState, s: Scenario, k: int, reg: VariableRegistry,
              sol: Solution) -> LedgerState:
    """Fold a solved session into the ledger: record its trade series and
    overwrite every schedule on the session window."""
    if sol.values is None:
        raise ValueError(f"session {k} solution has status {sol.status!r}, no assignment")
    x = sol.values
    tau = s.calendar.session(k).first_period
    window = range(tau, s.n_periods + 1)

    def merge(old: tuple[float, ...], role: str, entity: str, as_int: bool = False):
        new = list(old)
        for t in window:
            v = x[reg.id(role, entity, t)]
            new[t - 1] = _binary(v) if as_int else float(v)
        return tuple(new)

    trade = [0.0] * s.n_periods
    for t in window:
        trade[t - 1] = float(x[reg.id(IDM_TRADE, "vpp", t)])

    objectives = dict(ledger.objectives)
    objectives[f"idm{k}"] = float(sol.objective)
    return replace(
        ledger,
        idm_trades={**ledger.idm_trades, k: tuple(trade)},
        demand_p={d.id: merge(ledger.demand_p[d.id], DEM_P, d.id) for d in s.demands},
        dres_p={a.id: merge(ledger.dres_p[a.id], DRES_P, a.id) for a in s.dres},
        dres_u={a.id: merge(ledger.dres_u[a.id], DRES_U, a.id, as_int=True)
                for a in s.dres},
        ndres_p={a.id: merge(ledger.ndres_p[a.id], NDRES_P, a.id) for a in s.ndres},
        stu_series={a.id: {role: merge(ledger.stu_series[a.id][role], role, a.id,
                                       as_int=role in (stu_mod.UPLUS, stu_mod.PB_ON,
                                                       stu_mod.PB_START))
                           for role in STU_ROLES} for a in s.stu},
        objectives=objectives,
    )


# ---------------------------------------------------------------------------
# Session model
# ---------------------------------------------------------------------------

def register_idm_variables(model: MilpModel, reg: VariableRegistry, s: Scenario,
                           periods: list[int]) -> None:
    net = s.network
    for t in periods:
        reg.new(model, IDM_TRADE, "vpp", t, lb=-np.inf, ub=np.inf)
        for b in net.main_grid_buses:
            cap = net.trade_cap[b]
            reg.new(model, TRADE_BUS, b, t, lb=-cap, ub=cap)
        for b in net.buses:
            reg.new(model, ANGLE, b, t, lb=-np.inf, ub=np.inf)
        for line in net.lines:
            reg.new(model, FLOW, line.id, t, lb=-line.flow_limit, ub=line.flow_limit)
        for a in s.dres:
            reg.new(model, DRES_P, a.id, t, lb=0.0, ub=a.p_max)
            reg.new(model, DRES_U, a.id, t, kind="binary")
            # pinned by the recommitment equality, as in the day-ahead model
            reg.new(model, DRES_V, a.id, t, lb=0.0, ub=1.0)
            reg.new(model, DRES_W, a.id, t, lb=0.0, ub=1.0)
            reg.new(model, DRES_C1, a.id, t, lb=0.0, ub=np.inf)
            reg.new(model, DRES_C0, a.id, t, lb=0.0, ub=np.inf)
            reg.new(model, DRES_DP, a.id, t, lb=-np.inf, ub=np.inf)
        for a in s.ndres:
            reg.new(model, NDRES_P, a.id, t, lb=0.0, ub=np.inf)
        for d in s.demands:
            reg.new(model, DEM_P, d.id, t, lb=0.0, ub=np.inf)
    for a in s.stu:
        stu_mod.register_stu_variables(model, reg, a, periods)


def build_idm_objective(s: Scenario, ledger: LedgerState, k: int,
                        reg: VariableRegistry) -> dict[int, float]:
    """Session profit: adjustment revenue at session prices minus dispatch
    change costs. Profile payments are day-ahead only."""
    sess = s.calendar.session(k)
    dt = s.dt
    coeffs: dict[int, float] = {}
    for t in range(sess.first_period, s.n_periods + 1):
        coeffs[reg.id(IDM_TRADE, "vpp", t)] = sess.prices[t - sess.first_period] * dt
        for a in s.dres:
            coeffs[reg.id(DRES_DP, a.id, t)] = -a.variable_cost * dt
            coeffs[reg.id(DRES_C1, a.id, t)] = -1.0
            coeffs[reg.id(DRES_C0, a.id, t)] = -1.0
    return coeffs


def build_idm_trade_constraints(model: MilpModel, reg: VariableRegistry, s: Scenario,
                                ledger: LedgerState, k: int,
                                forecast: ForecastSet) -> None:
    """Tie the session adjustment to the physical bus trades and impose the
    published purchase/sale relaxation bounds on the cumulative position."""
    tau = s.calendar.session(k).first_period
    charge = sum(a.charge_max for a in s.stu)
    for t in range(tau, s.n_periods + 1):
        prior = ledger.cumulative_trade(t)
        bus_sum = {reg.id(TRADE_BUS, b, t): 1.0 for b in s.network.main_grid_buses}

        # cumulative physical trade = prior position + this session's move
        coeffs = dict(bus_sum)
        coeffs[reg.id(IDM_TRADE, "vpp", t)] = -1.0
        model.add_constraint(coeffs, "==", prior, f"idm_cum_def.t{t}")

        avail = {a.id: forecast.ndres_avail[a.id][t - tau] for a in s.ndres}
        model.add_constraint(dict(bus_sum), "<=", trade_upper_bound(s, avail),
                             f"idm_cum_hi.t{t}")
        flex_load = sum((1.0 + d.tol_hi[t - 1])
                        * d.profile(ledger.selected_profiles[d.id]).power[t - 1]
                        for d in s.demands)
        model.add_constraint(dict(bus_sum), ">=", -(flex_load + charge),
                             f"idm_cum_lo.t{t}")


def build_idm_dres_constraints(model: MilpModel, reg: VariableRegistry, s: Scenario,
                               ledger: LedgerState, k: int) -> None:
    """Re-commitment against the previous session's plan: output windows,
    per-period change carriers, and the dispatch delta definition."""
    tau = s.calendar.session(k).first_period
    for a in s.dres:
        prev_p = ledger.dres_p[a.id]
        prev_u = ledger.dres_u[a.id]
        for t in range(tau, s.n_periods + 1):
            p = reg.id(DRES_P, a.id, t)
            u = reg.id(DRES_U, a.id, t)
            v = reg.id(DRES_V, a.id, t)
            w = reg.id(DRES_W, a.id, t)
            dp = reg.id(DRES_DP, a.id, t)
            model.add_constraint({p: 1.0, u: -a.p_max}, "<=", 0.0, f"dres_hi.{a.id}.t{t}")
            model.add_constraint({p: 1.0, u: -a.p_min}, ">=", 0.0, f"dres_lo.{a.id}.t{t}")
            model.add_constraint({v: 1.0, w: -1.0, u: -1.0}, "==", -float(prev_u[t - 1]),
                                 f"dres_recommit.{a.id}.t{t}")
            model.add_constraint({reg.id(DRES_C1, a.id, t): 1.0, v: -a.startup_cost},
                                 "==", 0.0, f"dres_c1.{a.id}.t{t}")
            model.add_constraint({reg.id(DRES_C0, a.id, t): 1.0, w: -a.shutdown_cost},
                                 "==", 0.0, f"dres_c0.{a.id}.t{t}")
            model.add_constraint({dp: 1.0, p: -1.0}, "==", -prev_p[t - 1],
                                 f"dres_delta.{a.id}.t{t}")


def build_idm_demand_constraints(model: MilpModel, reg: VariableRegistry, s: Scenario,
                                 ledger: LedgerState, k: int) -> None:
    """Tolerance band around the selected profile, ramp limits stitched to
    settled periods, and the residual minimum-energy requirement."""
    tau = s.calendar.session(k).first_period
    dt = s.dt
    for d in s.demands:
        profile = d.profile(ledger.selected_profiles[d.id])
        settled = ledger.demand_p[d.id]
        for t in range(tau, s.n_periods + 1):
            ref = profile.power[t - 1]
            model.set_bounds(reg.id(DEM_P, d.id, t),
                             lb=(1.0 - d.tol_lo[t - 1]) * ref,
                             ub=(1.0 + d.tol_hi[t - 1]) * ref)
        for t in range(max(tau, 2), s.n_periods + 1):
            p = reg.id(DEM_P, d.id, t)
            if t - 1 >= tau:
                prev = reg.id(DEM_P, d.id, t - 1)
                model.add_constraint({p: 1.0, prev: -1.0}, "<=", d.ramp_up * dt,
                                     f"dem_rampup.{d.id}.t{t}")
                model.add_constraint({prev: 1.0, p: -1.0}, "<=", d.ramp_down * dt,
                                     f"dem_rampdn.{d.id}.t{t}")
            else:
                fixed = settled[t - 2]
                model.add_constraint({p: 1.0}, "<=", fixed + d.ramp_up * dt,
                                     f"dem_rampup.{d.id}.t{t}")
                model.add_constraint({p: 1.0}, ">=", fixed - d.ramp_down * dt,
                                     f"dem_rampdn.{d.id}.t{t}")
        consumed = sum(settled[t - 1] for t in range(1, tau)) * dt
        window_terms = {reg.id(DEM_P, d.id, t): dt for t in range(tau, s.n_periods + 1)}
        model.add_constraint(window_terms, ">=", d.min_energy - consumed,
                             f"dem_minenergy.{d.id}")


def build_idm_ndres_constraints(model: MilpModel, reg: VariableRegistry, s: Scenario,
                                k: int, forecast: ForecastSet) -> None:
    tau = s.calendar.session(k).first_period
    for a in s.ndres:
        series = forecast.ndres_avail[a.id]
        for t in range(tau, s.n_periods + 1):
            model.set_bounds(reg.id(NDRES_P, a.id, t),
                             lb=a.p_min[t - 1], ub=series[t - tau])


def build_idm_stu_blocks(model: MilpModel, reg: VariableRegistry, s: Scenario,
                         ledger: LedgerState, k: int, forecast: ForecastSet) -> None:
    tau = s.calendar.session(k).first_period
    periods = list(range(tau, s.n_periods + 1))
    for a in s.stu:
        series = forecast.stu_avail[a.id]
        avail = {t: series[t - tau] for t in periods}
        if tau == 1:
            e0, on0 = a.initial_energy, a.initial_pb_on
        else:
            e0 = ledger.stu_series[a.id][stu_mod.ENERGY][tau - 2]
            on0 = bool(ledger.stu_series[a.id][stu_mod.PB_ON][tau - 2])
        stu_mod.build_stu_constraints(model, reg, a, periods, avail, s.dt, e0, on0)
        stu_mod.build_pb_conversion(model, reg, a, periods)


def assemble_idm(s: Scenario, ledger: LedgerState, k: int,
                 forecast: ForecastSet | None = None) -> tuple[MilpModel, VariableRegistry]:
    """Complete model for intraday session k given the ledger so far."""
    if forecast is None:
        forecast = s.forecast(k)
    tau = s.calendar.session(k).first_period
    model = MilpModel(f"idm{k}[{s.name}]" if s.name else f"idm{k}")
    reg = VariableRegistry()
    periods = list(range(tau, s.n_periods + 1))
    register_idm_variables(model, reg, s, periods)
    build_balance_constraints(model, reg, s, periods)
    build_dc_flow_constraints(model, reg, s, periods)
    build_idm_trade_constraints(model, reg, s, ledger, k, forecast)
    build_idm_dres_constraints(model, reg, s, ledger, k)
    build_idm_ndres_constraints(model, reg, s, k, forecast)
    build_idm_demand_constraints(model, reg, s, ledger, k)
    build_idm_stu_blocks(model, reg, s, ledger, k, forecast)
    model.set_objective(build_idm_objective(s, ledger, k, reg))
    model.validate()
    return model, reg
