"""Result serialization: schedules, trade series, profits, verification.

A :class:`Report` is the flattened, serializable view of a finished run:
per-period traded power for the day-ahead stage and each intraday session,
final dispatch and consumption series, storage trajectories, the profit
decomposition and the verifier summary. CSV files carry 6 decimals for
humans and plotting; JSON carries full double precision for machines.
Loaders read every emitted file back, so round-trip tests can hold the
formats to their schemas.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from vppopt import stu as stu_mod
from vppopt.orchestrator import (
    RunResult,
    check_aggregate_balance,
    check_demand_contracts,
    check_storage_conservation,
    ThresholdEntry,
)
from vppopt.scenario import Scenario

NOCOORD_NOTE = ("no-coordination baseline: every generation asset bids alone at the "
                "full coupling-point capacity with network limits ignored; demands "
                "buy their default profile at day-ahead prices")


@dataclass(frozen=True)
class Report:
    scenario_name: str
    mode: str
    n_periods: int
    dam_trade: tuple[float, ...]
    idm_trade: dict[int, tuple[float, ...]]
    idm_cumulative: dict[int, tuple[float, ...]]
    dispatch: dict[str, tuple[float, ...]]
    storage: dict[str, tuple[float, ...]]
    demand: dict[str, tuple[float, ...]]
    profits: dict[str, float]
    recomputed_profits: dict[str, float]
    chosen_profiles: dict[str, str]
    profile_costs: dict[str, float]
    sessions: list[dict]
    checks: dict[str, list[str]]
    failure: str | None = None
    passive_demand_profit: dict[str, float] = field(default_factory=dict)
    note: str = ""

    @property
    def total_profit(self) -> float:
        return sum(self.profits.values())

    def verifier_summary(self) -> list[str]:
        out = [f"{sess['key']}: {v}" for sess in self.sessions for v in sess["violations"]]
        for name, problems in self.checks.items():
            out.extend(f"{name}: {p}" for p in problems)
        return out


def _session_dicts(result: RunResult) -> list[dict]:
    return [
        {
            "key": r.key,
            "status": r.status,
            "objective": r.objective,
            "violations": [f"{v.kind} {v.name}: {v.residual:.3e}" for v in r.violations],
            "runtimeS": r.runtime_s,
            "nVars": r.n_vars,
            "nConstraints": r.n_constraints,
        }
        for r in result.sessions
    ]


def build_report(s: Scenario, result: RunResult) -> Report:
    if result.mode == "nocoord":
        return _build_nocoord_report(s, result)
    ledger = result.ledger
    if ledger is None:
        return Report(
            scenario_name=s.name, mode=result.mode, n_periods=s.n_periods,
            dam_trade=(), idm_trade={}, idm_cumulative={}, dispatch={}, storage={},
            demand={}, profits={}, recomputed_profits={}, chosen_profiles={},
            profile_costs={}, sessions=_session_dicts(result), checks={},
            failure=result.failure)

    idm_cumulative: dict[int, tuple[float, ...]] = {}
    running = list(ledger.dam_trade)
    for k in sorted(ledger.idm_trades):
        running = [c + v for c, v in zip(running, ledger.idm_trades[k])]
        idm_cumulative[k] = tuple(running)

    dispatch: dict[str, tuple[float, ...]] = {}
    for a in s.dres:
        dispatch[a.id] = ledger.dres_p[a.id]
    for a in s.ndres:
        dispatch[a.id] = ledger.ndres_p[a.id]
    for a in s.stu:
        dispatch[a.id] = ledger.stu_series[a.id][stu_mod.POWER]

    checks = {
        "demandContracts": check_demand_contracts(s, ledger),
        "aggregateBalance": check_aggregate_balance(s, ledger),
        "storageConservation": check_storage_conservation(s, ledger),
    }
    return Report(
        scenario_name=s.name,
        mode=result.mode,
        n_periods=s.n_periods,
        dam_trade=ledger.dam_trade,
        idm_trade=dict(ledger.idm_trades),
        idm_cumulative=idm_cumulative,
        dispatch=dispatch,
        storage={a.id: ledger.stu_series[a.id][stu_mod.ENERGY] for a in s.stu},
        demand=dict(ledger.demand_p),
        profits=dict(result.profits.per_session),
        recomputed_profits=dict(result.profits.recomputed),
        chosen_profiles=dict(ledger.selected_profiles),
        profile_costs={d.id: d.profile(ledger.selected_profiles[d.id]).cost
                       for d in s.demands},
        sessions=_session_dicts(result),
        checks=checks,
        failure=result.failure,
    )


def _build_nocoord_report(s: Scenario, result: RunResult) -> Report:
    T = s.n_periods
    dam_trade = [0.0] * T
    idm_trade: dict[int, list[float]] = {sess.k: [0.0] * T for sess in s.calendar.sessions}
    dispatch: dict[str, tuple[float, ...]] = {}
    storage: dict[str, tuple[float, ...]] = {}
    checks: dict[str, list[str]] = {"storageConservation": [], "aggregateBalance": [],
                                    "demandContracts": []}
    for aid, run in result.asset_runs:
        ledger = run.ledger
        if ledger is None:
            continue
        for t in range(T):
            dam_trade[t] += ledger.dam_trade[t]
        for k, series in ledger.idm_trades.items():
            for t in range(T):
                idm_trade[k][t] += series[t]
        for cid, series in ledger.dres_p.items():
            dispatch[cid] = series
        for rid, series in ledger.ndres_p.items():
            dispatch[rid] = series
        for tid, roles in ledger.stu_series.items():
            dispatch[tid] = roles[stu_mod.POWER]
            storage[tid] = roles[stu_mod.ENERGY]

    demand = {}
    for d in s.demands:
        profile = d.default_profile()
        demand[d.id] = profile.power
        for t in range(T):
            dam_trade[t] -= profile.power[t]

    idm_cumulative: dict[int, tuple[float, ...]] = {}
    running = list(dam_trade)
    for k in sorted(idm_trade):
        running = [c + v for c, v in zip(running, idm_trade[k])]
        idm_cumulative[k] = tuple(running)

    return Report(
        scenario_name=s.name,
        mode="nocoord",
        n_periods=T,
        dam_trade=tuple(dam_trade),
        idm_trade={k: tuple(v) for k, v in idm_trade.items()},
        idm_cumulative=idm_cumulative,
        dispatch=dispatch,
        storage=storage,
        demand=demand,
        profits=dict(result.profits.per_session),
        recomputed_profits=dict(result.profits.recomputed),
        chosen_profiles={d.id: d.default_profile().id for d in s.demands},
        profile_costs={d.id: 0.0 for d in s.demands},
        sessions=_session_dicts(result),
        checks=checks,
        failure=result.failure,
        passive_demand_profit=dict(result.passive_demand_profit),
        note=NOCOORD_NOTE,
    )


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in row])


def emit_report(report: Report, out_dir: str | Path) -> list[Path]:
    """Write the full file set; overwrites are idempotent. Returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    periods = range(1, report.n_periods + 1)

    if report.dam_trade:
        path = out / "dam.csv"
        _write_csv(path, ["period", "tradedMW"],
                   [[t, float(report.dam_trade[t - 1])] for t in periods])
        written.append(path)

    for k in sorted(report.idm_trade):
        path = out / f"idm_{k}.csv"
        _write_csv(path, ["period", "tradedMW", "cumulativeMW"],
                   [[t, float(report.idm_trade[k][t - 1]),
                     float(report.idm_cumulative[k][t - 1])] for t in periods])
        written.append(path)

    if report.dispatch:
        path = out / "dispatch.csv"
        rows = [[t, aid, float(series[t - 1])]
                for aid, series in sorted(report.dispatch.items()) for t in periods]
        _write_csv(path, ["period", "assetId", "MW"], rows)
        written.append(path)

    if report.storage:
        path = out / "storage.csv"
        rows = [[t, sid, float(series[t - 1])]
                for sid, series in sorted(report.storage.items()) for t in periods]
        _write_csv(path, ["period", "stuId", "MWh_th"], rows)
        written.append(path)

    if report.demand:
        path = out / "demand.csv"
        rows = [[t, did, float(series[t - 1])]
                for did, series in sorted(report.demand.items()) for t in periods]
        _write_csv(path, ["period", "demandId", "MW"], rows)
        written.append(path)

    profit_doc = {
        "scenario": report.scenario_name,
        "mode": report.mode,
        "sessions": report.profits,
        "recomputed": report.recomputed_profits,
        "total": report.total_profit,
        "failure": report.failure,
    }
    if report.mode == "nocoord":
        profit_doc["passiveDemandProfit"] = report.passive_demand_profit
        profit_doc["note"] = report.note
    path = out / "profit.json"
    path.write_text(json.dumps(profit_doc, indent=2) + "\n")
    written.append(path)

    path = out / "profiles.json"
    path.write_text(json.dumps(
        {d: {"selected": p, "cost": report.profile_costs.get(d, 0.0)}
         for d, p in sorted(report.chosen_profiles.items())}, indent=2) + "\n")
    written.append(path)

    path = out / "verify.json"
    path.write_text(json.dumps({
        "sessions": report.sessions,
        "checks": report.checks,
        "summary": report.verifier_summary(),
    }, indent=2) + "\n")
    written.append(path)
    return written


def emit_thresholds(entries: list[ThresholdEntry], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "thresholds.csv"
    rows = []
    for e in entries:
        rows.append([e.demand_id, e.profile_id, e.status,
                     "" if e.threshold is None else f"{e.threshold:.6f}",
                     f"{e.resolution:.6f}"])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["demandId", "profileId", "status", "thresholdEUR", "resolutionEUR"])
        writer.writerows(rows)
    return path


# ---------------------------------------------------------------------------
# Loaders
# ---------------------------------------------------------------------------

def load_trade_csv(path: str | Path) -> dict[str, list[float]]:
    """Read dam.csv / idm_<k>.csv into column lists keyed by header."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        cols: dict[str, list[float]] = {name: [] for name in reader.fieldnames or []}
        for row in reader:
            for name, value in row.items():
                cols[name].append(float(value))
    return cols


def load_long_csv(path: str | Path) -> dict[str, list[float]]:
    """Read a (period, id, value) file into per-id series."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        series: dict[str, list[tuple[int, float]]] = {}
        for period, ident, value in reader:
            series.setdefault(ident, []).append((int(float(period)), float(value)))
    return {ident: [v for _, v in sorted(points)] for ident, points in series.items()}


def load_profit_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def load_profiles_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def load_verify_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def load_thresholds_csv(path: str | Path) -> list[ThresholdEntry]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ThresholdEntry(
                demand_id=row["demandId"], profile_id=row["profileId"],
                status=row["status"],
                threshold=float(row["thresholdEUR"]) if row["thresholdEUR"] else None,
                resolution=float(row["resolutionEUR"])))
    return out
