"""Scenario data model: network, assets, market calendar, forecasts.

A :class:`Scenario` bundles everything one experiment needs: the internal
network with its main-grid coupling points, the four asset classes
(dispatchable and non-dispatchable renewables, solar thermal units with
storage, flexible demands), day-ahead and intraday prices, and one
availability forecast set per market session.

Conventions
-----------
* Powers are MW, energies MWh, prices EUR/MWh, fractions plain decimals.
  Thermal quantities carry an ``_th`` suffix in the JSON schema.
* Periods are 1-based: ``t`` runs from 1 to ``T`` and maps to array
  index ``t - 1``. Session windows cover ``t >= tau``.
* Per-period series are dense. In JSON a scalar may stand in for a
  constant series; it is broadcast on load.
* Scenario values are immutable after construction and safe to share
  across concurrent solver runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping


class ScenarioError(ValueError):
    """Raised when a scenario file cannot be parsed into the data model."""


class ScenarioValidationError(ScenarioError):
    """Raised when a structurally sound scenario violates an invariant."""

    def __init__(self, diagnostics: list["Diagnostic"]):
        self.diagnostics = diagnostics
        first = diagnostics[0]
        more = f" (+{len(diagnostics) - 1} more)" if len(diagnostics) > 1 else ""
        super().__init__(f"invalid scenario: {first}{more}")


@dataclass(frozen=True)
class Diagnostic:
    """One violated validation rule, tied to the offending entity."""

    entity: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"[{self.entity}] {self.rule}: {self.message}"


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float  # p.u.
    flow_limit: float   # MW


@dataclass(frozen=True)
class Network:
    buses: tuple[str, ...]
    main_grid_buses: tuple[str, ...]  # coupling points with the main grid
    lines: tuple[Line, ...]
    trade_cap: Mapping[str, float]    # MW per main-grid bus


@dataclass(frozen=True)
class DresAsset:
    """Dispatchable renewable plant (hydro, biomass), committed like a
    conventional unit with linear operating costs."""

    id: str
    bus: str
    p_min: float          # MW when committed
    p_max: float
    variable_cost: float  # EUR/MWh
    startup_cost: float   # EUR
    shutdown_cost: float  # EUR
    initial_on: bool = False


@dataclass(frozen=True)
class NdresAsset:
    """Non-dispatchable renewable (wind, PV): output capped by the
    per-session availability forecast."""

    id: str
    bus: str
    p_min: tuple[float, ...]  # MW, technical minimum per period


@dataclass(frozen=True)
class StuAsset:
    """Solar thermal unit: solar field, thermal storage, and a power block
    whose thermal-to-electric conversion steepens with load."""

    id: str
    bus: str
    # power block thermal input window and piecewise conversion grid
    pb_min: float      # MW_th
    pb_max: float
    pb_break1: float
    pb_break2: float
    eta1: float        # conversion factor per segment, low to high load
    eta2: float
    eta3: float
    eta4: float
    startup_loss: float   # fraction of pb_max lost in a startup period
    # storage loop
    charge_min: float     # MW_th
    charge_max: float
    discharge_min: float
    discharge_max: float
    charge_eff: float
    discharge_eff: float
    storage_cap: tuple[float, ...]    # MWh_th per period
    storage_floor: tuple[float, ...]
    end_alpha_lo: float   # end-of-day energy window, as fraction of cap
    end_alpha_hi: float
    initial_energy: float  # MWh_th at the start of the horizon
    # electrical rating, used in aggregate trade bounds
    electrical_min: float  # MW
    electrical_max: float
    initial_pb_on: bool = False


@dataclass(frozen=True)
class DemandProfile:
    id: str
    power: tuple[float, ...]  # MW per period
    cost: float               # EUR paid to the owner if selected
    default: bool = False


@dataclass(frozen=True)
class DemandAsset:
    """Flexible demand: one profile is picked day-ahead, intraday sessions
    may then flex consumption inside a tolerance band."""

    id: str
    bus: str
    profiles: tuple[DemandProfile, ...]
    min_energy: float            # MWh over the horizon
    tol_lo: tuple[float, ...]    # fraction below the chosen profile
    tol_hi: tuple[float, ...]    # fraction above
    ramp_down: float             # MW/h
    ramp_up: float

    def default_profile(self) -> DemandProfile:
        for p in self.profiles:
            if p.default:
                return p
        raise ScenarioError(f"demand {self.id} has no default profile")

    def profile(self, profile_id: str) -> DemandProfile:
        for p in self.profiles:
            if p.id == profile_id:
                return p
        raise KeyError(f"demand {self.id} has no profile {profile_id!r}")


@dataclass(frozen=True)
class IdmSession:
    k: int
    first_period: int           # tau: first delivery period covered
    prices: tuple[float, ...]   # EUR/MWh for t = tau .. T


@dataclass(frozen=True)
class MarketCalendar:
    n_periods: int              # T
    dt_hours: float
    dam_prices: tuple[float, ...]
    sessions: tuple[IdmSession, ...]

    def session(self, k: int) -> IdmSession:
        for s in self.sessions:
            if s.k == k:
                return s
        raise KeyError(f"no intraday session {k}")


@dataclass(frozen=True)
class ForecastSet:
    """Availability forecasts for one market session.

    Series span that session's delivery window: the full horizon for the
    day-ahead stage, ``t >= tau`` for an intraday session.
    """

    ndres_avail: Mapping[str, tuple[float, ...]]   # MW
    stu_avail: Mapping[str, tuple[float, ...]]     # MW_th from the solar field


@dataclass(frozen=True)
class Scenario:
    network: Network
    dres: tuple[DresAsset, ...]
    ndres: tuple[NdresAsset, ...]
    stu: tuple[StuAsset, ...]
    demands: tuple[DemandAsset, ...]
    calendar: MarketCalendar
    dam_forecast: ForecastSet
    idm_forecasts: Mapping[int, ForecastSet]
    name: str = ""

    @property
    def n_periods(self) -> int:
        return self.calendar.n_periods

    @property
    def dt(self) -> float:
        return self.calendar.dt_hours

    def asset_ids(self) -> list[str]:
        out = [a.id for a in self.dres + self.ndres + self.stu + self.demands]
        return out

    def dres_by_id(self, asset_id: str) -> DresAsset:
        return _by_id(self.dres, asset_id)

    def ndres_by_id(self, asset_id: str) -> NdresAsset:
        return _by_id(self.ndres, asset_id)

    def stu_by_id(self, asset_id: str) -> StuAsset:
        return _by_id(self.stu, asset_id)

    def demand_by_id(self, asset_id: str) -> DemandAsset:
        return _by_id(self.demands, asset_id)

    def forecast(self, session: int | None) -> ForecastSet:
        """Forecast set for a session; ``None`` means the day-ahead stage."""
        if session is None:
            return self.dam_forecast
        try:
            return self.idm_forecasts[session]
        except KeyError:
            raise KeyError(f"no forecast set for intraday session {session}") from None


def _by_id(items, asset_id):
    for a in items:
        if a.id == asset_id:
            return a
    raise KeyError(f"unknown asset id {asset_id!r}")


# ---------------------------------------------------------------------------
# JSON loading
# ---------------------------------------------------------------------------

def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario JSON file.

    Raises :class:`ScenarioError` if the file does not parse against the
    schema and :class:`ScenarioValidationError` (carrying the full
    diagnostic list) if any invariant is violated.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc
    scenario = scenario_from_dict(doc, name=doc.get("name", path.stem))
    diagnostics = validate_scenario(scenario)
    if diagnostics:
        raise ScenarioValidationError(diagnostics)
    return scenario


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def _req(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise ScenarioError(f"{where}: missing required key {key!r}")
    return doc[key]


def _series(value: Any, length: int, where: str) -> tuple[float, ...]:
    """Coerce a scalar (constant series) or a dense list to a tuple."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),) * length
    if isinstance(value, (list, tuple)):
        if len(value) != length:
            raise ScenarioError(f"{where}: series has length {len(value)}, expected {length}")
        return tuple(float(v) for v in value)
    raise ScenarioError(f"{where}: expected a number or a list of numbers")


def _on_off(value: Any, where: str) -> bool:
    if isinstance(value, bool):
        return value
    if value in ("on", "ON"):
        return True
    if value in ("off", "OFF"):
        return False
    raise ScenarioError(f"{where}: expected 'on', 'off' or a boolean, got {value!r}")


def scenario_from_dict(doc: Mapping[str, Any], name: str = "") -> Scenario:
    """Build a :class:`Scenario` from a parsed JSON document (no validation)."""
    net_doc = _req(doc, "network", "scenario")
    cal_doc = _req(doc, "calendar", "scenario")

    n_periods = int(_req(cal_doc, "T", "calendar"))
    dt_hours = float(_req(cal_doc, "dtHours", "calendar"))
    dam_prices = _series(_req(cal_doc, "damPrices", "calendar"), n_periods, "calendar.damPrices")
    sessions = []
    for s_doc in cal_doc.get("sessions", []):
        k = int(_req(s_doc, "k", "calendar.sessions"))
        tau = int(_req(s_doc, "tau", f"session {k}"))
        window = n_periods - tau + 1
        prices = _series(_req(s_doc, "prices", f"session {k}"), window, f"session {k}.prices")
        sessions.append(IdmSession(k=k, first_period=tau, prices=prices))

    lines = tuple(
        Line(
            id=str(_req(l, "id", "line")),
            from_bus=str(_req(l, "from", f"line {l.get('id')}")),
            to_bus=str(_req(l, "to", f"line {l.get('id')}")),
            susceptance=float(_req(l, "susceptance", f"line {l.get('id')}")),
            flow_limit=float(_req(l, "flowLimit", f"line {l.get('id')}")),
        )
        for l in net_doc.get("lines", [])
    )
    network = Network(
        buses=tuple(str(b) for b in _req(net_doc, "buses", "network")),
        main_grid_buses=tuple(str(b) for b in _req(net_doc, "mainGridBuses", "network")),
        lines=lines,
        trade_cap={str(b): float(v) for b, v in _req(net_doc, "tradeCap", "network").items()},
    )

    dres = tuple(
        DresAsset(
            id=str(_req(a, "id", "dres")),
            bus=str(_req(a, "bus", f"dres {a.get('id')}")),
            p_min=float(_req(a, "pMin", f"dres {a.get('id')}")),
            p_max=float(_req(a, "pMax", f"dres {a.get('id')}")),
            variable_cost=float(_req(a, "variableCost", f"dres {a.get('id')}")),
            startup_cost=float(_req(a, "startupCost", f"dres {a.get('id')}")),
            shutdown_cost=float(_req(a, "shutdownCost", f"dres {a.get('id')}")),
            initial_on=_on_off(a.get("initialCommitment", "off"), f"dres {a.get('id')}"),
        )
        for a in doc.get("dres", [])
    )

    ndres = tuple(
        NdresAsset(
            id=str(_req(a, "id", "ndres")),
            bus=str(_req(a, "bus", f"ndres {a.get('id')}")),
            p_min=_series(a.get("pMin", 0.0), n_periods, f"ndres {a.get('id')}.pMin"),
        )
        for a in doc.get("ndres", [])
    )

    stu = tuple(
        StuAsset(
            id=str(_req(a, "id", "stu")),
            bus=str(_req(a, "bus", f"stu {a.get('id')}")),
            pb_min=float(_req(a, "pbMin_th", f"stu {a.get('id')}")),
            pb_max=float(_req(a, "pbMax_th", f"stu {a.get('id')}")),
            pb_break1=float(_req(a, "pbBreak1_th", f"stu {a.get('id')}")),
            pb_break2=float(_req(a, "pbBreak2_th", f"stu {a.get('id')}")),
            eta1=float(_req(a, "eta1", f"stu {a.get('id')}")),
            eta2=float(_req(a, "eta2", f"stu {a.get('id')}")),
            eta3=float(_req(a, "eta3", f"stu {a.get('id')}")),
            eta4=float(_req(a, "eta4", f"stu {a.get('id')}")),
            startup_loss=float(_req(a, "startupLossFactor", f"stu {a.get('id')}")),
            charge_min=float(_req(a, "chargeMin_th", f"stu {a.get('id')}")),
            charge_max=float(_req(a, "chargeMax_th", f"stu {a.get('id')}")),
            discharge_min=float(_req(a, "dischargeMin_th", f"stu {a.get('id')}")),
            discharge_max=float(_req(a, "dischargeMax_th", f"stu {a.get('id')}")),
            charge_eff=float(_req(a, "chargeEff", f"stu {a.get('id')}")),
            discharge_eff=float(_req(a, "dischargeEff", f"stu {a.get('id')}")),
            storage_cap=_series(_req(a, "storageCap_th", f"stu {a.get('id')}"), n_periods,
                                f"stu {a.get('id')}.storageCap_th"),
            storage_floor=_series(a.get("storageFloor_th", 0.0), n_periods,
                                  f"stu {a.get('id')}.storageFloor_th"),
            end_alpha_lo=float(_req(a, "endAlphaLo", f"stu {a.get('id')}")),
            end_alpha_hi=float(_req(a, "endAlphaHi", f"stu {a.get('id')}")),
            initial_energy=float(_req(a, "initialEnergy_th", f"stu {a.get('id')}")),
            electrical_min=float(_req(a, "electricalMin", f"stu {a.get('id')}")),
            electrical_max=float(_req(a, "electricalMax", f"stu {a.get('id')}")),
            initial_pb_on=_on_off(a.get("initialPbStatus", "off"), f"stu {a.get('id')}"),
        )
        for a in doc.get("stu", [])
    )

    demands = []
    for a in doc.get("demands", []):
        did = str(_req(a, "id", "demand"))
        profiles = tuple(
            DemandProfile(
                id=str(_req(p, "id", f"demand {did} profile")),
                power=_series(_req(p, "power", f"demand {did} profile {p.get('id')}"),
                              n_periods, f"demand {did} profile {p.get('id')}.power"),
                cost=float(p.get("cost", 0.0)),
                default=bool(p.get("default", False)),
            )
            for p in _req(a, "profiles", f"demand {did}")
        )
        demands.append(DemandAsset(
            id=did,
            bus=str(_req(a, "bus", f"demand {did}")),
            profiles=profiles,
            min_energy=float(_req(a, "minEnergy", f"demand {did}")),
            tol_lo=_series(a.get("tolLo", 0.0), n_periods, f"demand {did}.tolLo"),
            tol_hi=_series(a.get("tolHi", 0.0), n_periods, f"demand {did}.tolHi"),
            ramp_down=float(_req(a, "rampDown", f"demand {did}")),
            ramp_up=float(_req(a, "rampUp", f"demand {did}")),
        ))

    fc_doc = _req(doc, "forecasts", "scenario")
    dam_forecast = _forecast_from_dict(_req(fc_doc, "dam", "forecasts"), n_periods, "forecasts.dam")
    idm_forecasts = {}
    for key, sub in fc_doc.get("idm", {}).items():
        k = int(key)
        session = next((s for s in sessions if s.k == k), None)
        window = n_periods - session.first_period + 1 if session else n_periods
        idm_forecasts[k] = _forecast_from_dict(sub, window, f"forecasts.idm.{k}")

    return Scenario(
        network=network,
        dres=dres,
        ndres=ndres,
        stu=stu,
        demands=tuple(demands),
        calendar=MarketCalendar(n_periods=n_periods, dt_hours=dt_hours,
                                dam_prices=dam_prices, sessions=tuple(sessions)),
        dam_forecast=dam_forecast,
        idm_forecasts=idm_forecasts,
        name=name or str(doc.get("name", "")),
    )


def _forecast_from_dict(doc: Mapping[str, Any], window: int, where: str) -> ForecastSet:
    return ForecastSet(
        ndres_avail={str(i): _series(v, window, f"{where}.ndresAvail.{i}")
                     for i, v in doc.get("ndresAvail", {}).items()},
        stu_avail={str(i): _series(v, window, f"{where}.stuAvail_th.{i}")
                   for i, v in doc.get("stuAvail_th", {}).items()},
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize to the JSON schema. Round-trips field-for-field."""
    s = scenario

    def fc(f: ForecastSet) -> dict:
        return {
            "ndresAvail": {i: list(v) for i, v in sorted(f.ndres_avail.items())},
            "stuAvail_th": {i: list(v) for i, v in sorted(f.stu_avail.items())},
        }

    return {
        "name": s.name,
        "network": {
            "buses": list(s.network.buses),
            "mainGridBuses": list(s.network.main_grid_buses),
            "lines": [
                {"id": l.id, "from": l.from_bus, "to": l.to_bus,
                 "susceptance": l.susceptance, "flowLimit": l.flow_limit}
                for l in s.network.lines
            ],
            "tradeCap": {b: v for b, v in sorted(s.network.trade_cap.items())},
        },
        "dres": [
            {"id": a.id, "bus": a.bus, "pMin": a.p_min, "pMax": a.p_max,
             "variableCost": a.variable_cost, "startupCost": a.startup_cost,
             "shutdownCost": a.shutdown_cost,
             "initialCommitment": "on" if a.initial_on else "off"}
            for a in s.dres
        ],
        "ndres": [
            {"id": a.id, "bus": a.bus, "pMin": list(a.p_min)} for a in s.ndres
        ],
        "stu": [
            {"id": a.id, "bus": a.bus,
             "pbMin_th": a.pb_min, "pbMax_th": a.pb_max,
             "pbBreak1_th": a.pb_break1, "pbBreak2_th": a.pb_break2,
             "eta1": a.eta1, "eta2": a.eta2, "eta3": a.eta3, "eta4": a.eta4,
             "startupLossFactor": a.startup_loss,
             "chargeMin_th": a.charge_min, "chargeMax_th": a.charge_max,
             "dischargeMin_th": a.discharge_min, "dischargeMax_th": a.discharge_max,
             "chargeEff": a.charge_eff, "dischargeEff": a.discharge_eff,
             "storageCap_th": list(a.storage_cap), "storageFloor_th": list(a.storage_floor),
             "endAlphaLo": a.end_alpha_lo, "endAlphaHi": a.end_alpha_hi,
             "initialEnergy_th": a.initial_energy,
             "electricalMin": a.electrical_min, "electricalMax": a.electrical_max,
             "initialPbStatus": "on" if a.initial_pb_on else "off"}
            for a in s.stu
        ],
        "demands": [
            {"id": a.id, "bus": a.bus,
             "profiles": [
                 {"id": p.id, "power": list(p.power), "cost": p.cost, "default": p.default}
                 for p in a.profiles
             ],
             "minEnergy": a.min_energy,
             "tolLo": list(a.tol_lo), "tolHi": list(a.tol_hi),
             "rampDown": a.ramp_down, "rampUp": a.ramp_up}
            for a in s.demands
        ],
        "calendar": {
            "T": s.calendar.n_periods,
            "dtHours": s.calendar.dt_hours,
            "damPrices": list(s.calendar.dam_prices),
            "sessions": [
                {"k": sess.k, "tau": sess.first_period, "prices": list(sess.prices)}
                for sess in s.calendar.sessions
            ],
        },
        "forecasts": {
            "dam": fc(s.dam_forecast),
            "idm": {str(k): fc(f) for k, f in sorted(s.idm_forecasts.items())},
        },
    }


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_scenario(scenario: Scenario) -> list[Diagnostic]:
    """Check every invariant; return one diagnostic per violation.

    Pure: the same scenario always yields the same diagnostics, and an
    empty list means the scenario is safe to feed to the formulations.
    """
    out: list[Diagnostic] = []
    bad = out.append
    s = scenario
    T = s.calendar.n_periods

    # --- calendar ---
    if T < 1:
        bad(Diagnostic("calendar", "period_count", f"T must be >= 1, got {T}"))
    if s.calendar.dt_hours <= 0:
        bad(Diagnostic("calendar", "dt_positive", f"dtHours must be > 0, got {s.calendar.dt_hours}"))
    if len(s.calendar.dam_prices) != T:
        bad(Diagnostic("calendar", "price_length",
                       f"damPrices has {len(s.calendar.dam_prices)} entries, expected {T}"))
    if len(s.calendar.sessions) > 7:
        bad(Diagnostic("calendar", "too_many_sessions",
                       f"{len(s.calendar.sessions)} intraday sessions exceed the limit of 7"))
    prev_tau = None
    for sess in s.calendar.sessions:
        ent = f"idm{sess.k}"
        if sess.first_period < 1 or sess.first_period > T:
            bad(Diagnostic(ent, "tau_range", f"tau={sess.first_period} outside 1..{T}"))
            continue
        if prev_tau is not None and sess.first_period < prev_tau:
            bad(Diagnostic(ent, "tau_order", "first delivery period decreases between sessions"))
        prev_tau = sess.first_period
        expected = T - sess.first_period + 1
        if len(sess.prices) != expected:
            bad(Diagnostic(ent, "price_length",
                           f"prices span {len(sess.prices)} periods, expected {expected}"))
    if s.calendar.sessions and s.calendar.sessions[0].first_period != 1:
        bad(Diagnostic("idm1", "first_tau", "the first intraday session must cover the full day (tau=1)"))
    ks = [sess.k for sess in s.calendar.sessions]
    if len(set(ks)) != len(ks):
        bad(Diagnostic("calendar", "duplicate_id", "duplicate session ids"))

    # --- network ---
    net = s.network
    buses = set(net.buses)
    if not net.buses:
        bad(Diagnostic("network", "empty", "network has no buses"))
    if len(buses) != len(net.buses):
        bad(Diagnostic("network", "duplicate_id", "duplicate bus ids"))
    for b in net.main_grid_buses:
        if b not in buses:
            bad(Diagnostic(b, "main_grid_subset", "main-grid bus is not a network bus"))
    line_ids = [l.id for l in net.lines]
    if len(set(line_ids)) != len(line_ids):
        bad(Diagnostic("network", "duplicate_id", "duplicate line ids"))
    for l in net.lines:
        if l.from_bus not in buses or l.to_bus not in buses:
            bad(Diagnostic(l.id, "line_endpoint", "line endpoint is not a network bus"))
        if l.from_bus == l.to_bus:
            bad(Diagnostic(l.id, "line_endpoint", "line connects a bus to itself"))
        if l.susceptance <= 0:
            bad(Diagnostic(l.id, "susceptance_positive", f"susceptance {l.susceptance} must be > 0"))
        if l.flow_limit <= 0:
            bad(Diagnostic(l.id, "flow_limit_positive", f"flowLimit {l.flow_limit} must be > 0"))
    if net.buses and not _connected(net):
        bad(Diagnostic("network", "connected", "network graph is not connected"))
    for b in net.main_grid_buses:
        if b not in net.trade_cap:
            bad(Diagnostic(b, "trade_cap_missing", "main-grid bus has no trade capacity entry"))
    for b, cap in net.trade_cap.items():
        if cap < 0:
            bad(Diagnostic(b, "trade_cap_negative", f"trade capacity {cap} must be >= 0"))
        if b not in set(net.main_grid_buses):
            bad(Diagnostic(b, "trade_cap_unknown_bus", "trade capacity given for a non-main-grid bus"))

    # --- assets ---
    ids = s.asset_ids()
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        bad(Diagnostic(",".join(dupes), "duplicate_id", "asset ids must be unique across classes"))
    for a in s.dres + s.ndres + s.stu + s.demands:
        if a.bus not in buses:
            bad(Diagnostic(a.id, "unknown_bus", f"asset sits at unknown bus {a.bus!r}"))

    for a in s.dres:
        if not (0 <= a.p_min <= a.p_max):
            bad(Diagnostic(a.id, "power_bounds", f"need 0 <= pMin <= pMax, got [{a.p_min}, {a.p_max}]"))
        if min(a.variable_cost, a.startup_cost, a.shutdown_cost) < 0:
            bad(Diagnostic(a.id, "cost_negative", "costs must be >= 0"))

    for a in s.ndres:
        if len(a.p_min) != T:
            bad(Diagnostic(a.id, "series_length", f"pMin spans {len(a.p_min)} periods, expected {T}"))
        elif min(a.p_min) < 0:
            bad(Diagnostic(a.id, "min_negative", "pMin must be >= 0 element-wise"))

    for a in s.stu:
        if not (0 < a.pb_min <= a.pb_break1 <= a.pb_break2 <= a.pb_max):
            bad(Diagnostic(a.id, "breakpoint_order",
                           "need 0 < pbMin <= pbBreak1 <= pbBreak2 <= pbMax, got "
                           f"({a.pb_min}, {a.pb_break1}, {a.pb_break2}, {a.pb_max})"))
        etas = (a.eta1, a.eta2, a.eta3, a.eta4)
        if not (0 < etas[0] <= etas[1] <= etas[2] <= etas[3] <= 1):
            bad(Diagnostic(a.id, "eta_order",
                           f"conversion factors must rise with load within (0, 1], got {etas}"))
        if not (0 <= a.end_alpha_lo <= a.end_alpha_hi <= 1):
            bad(Diagnostic(a.id, "alpha_window",
                           f"need 0 <= endAlphaLo <= endAlphaHi <= 1, got [{a.end_alpha_lo}, {a.end_alpha_hi}]"))
        for label, eff in (("chargeEff", a.charge_eff), ("dischargeEff", a.discharge_eff)):
            if not (0 < eff <= 1):
                bad(Diagnostic(a.id, "efficiency_range", f"{label} {eff} outside (0, 1]"))
        if not (0 <= a.startup_loss <= 1):
            bad(Diagnostic(a.id, "startup_loss_range", f"startupLossFactor {a.startup_loss} outside [0, 1]"))
        if not (0 <= a.charge_min <= a.charge_max):
            bad(Diagnostic(a.id, "charge_bounds", "need 0 <= chargeMin <= chargeMax"))
        if not (0 <= a.discharge_min <= a.discharge_max):
            bad(Diagnostic(a.id, "discharge_bounds", "need 0 <= dischargeMin <= dischargeMax"))
        if len(a.storage_cap) != T or len(a.storage_floor) != T:
            bad(Diagnostic(a.id, "series_length", "storage cap/floor series must span the horizon"))
        elif any(f > c for f, c in zip(a.storage_floor, a.storage_cap)):
            bad(Diagnostic(a.id, "storage_window", "storage floor exceeds capacity in some period"))
        elif not (a.storage_floor[0] <= a.initial_energy <= a.storage_cap[0]):
            bad(Diagnostic(a.id, "initial_energy",
                           f"initialEnergy {a.initial_energy} outside "
                           f"[{a.storage_floor[0]}, {a.storage_cap[0]}]"))

    for a in s.demands:
        defaults = [p for p in a.profiles if p.default]
        if len(defaults) != 1:
            bad(Diagnostic(a.id, "default_profile",
                           f"expected exactly one default profile, found {len(defaults)}"))
        elif defaults[0].cost != 0:
            bad(Diagnostic(a.id, "default_profile",
                           f"default profile {defaults[0].id} must have cost 0"))
        pids = [p.id for p in a.profiles]
        if len(set(pids)) != len(pids):
            bad(Diagnostic(a.id, "duplicate_id", "duplicate profile ids"))
        for p in a.profiles:
            if len(p.power) != T:
                bad(Diagnostic(a.id, "series_length",
                               f"profile {p.id} spans {len(p.power)} periods, expected {T}"))
                continue
            if min(p.power) < 0:
                bad(Diagnostic(a.id, "profile_power_negative", f"profile {p.id} has negative power"))
            energy = sum(p.power) * s.calendar.dt_hours
            if a.min_energy > energy + 1e-9:
                bad(Diagnostic(a.id, "min_energy_unreachable",
                               f"minEnergy unreachable: {a.min_energy} MWh exceeds the "
                               f"{energy} MWh delivered by profile {p.id}"))
        for t in range(min(len(a.tol_lo), len(a.tol_hi))):
            if not (0 <= a.tol_lo[t] < 1) or not (0 <= a.tol_hi[t] < 1):
                bad(Diagnostic(a.id, "tolerance_range",
                               f"tolerance out of [0,1) in period {t + 1}"))
                break
        if len(a.tol_lo) != T or len(a.tol_hi) != T:
            bad(Diagnostic(a.id, "series_length", "tolerance series must span the horizon"))
        if a.ramp_down < 0 or a.ramp_up < 0:
            bad(Diagnostic(a.id, "ramp_negative", "ramp limits must be >= 0"))

    # --- forecasts ---
    sessions = {None: (s.dam_forecast, 1)}
    for sess in s.calendar.sessions:
        fcset = s.idm_forecasts.get(sess.k)
        if fcset is None:
            bad(Diagnostic(f"idm{sess.k}", "forecast_missing", "no forecast set for this session"))
            continue
        sessions[sess.k] = (fcset, sess.first_period)
    ndres_ids = {a.id for a in s.ndres}
    stu_ids = {a.id for a in s.stu}
    for key, (fcset, tau) in sessions.items():
        label = "dam" if key is None else f"idm{key}"
        window = T - tau + 1
        for group, known in (("ndresAvail", ndres_ids), ("stuAvail_th", stu_ids)):
            series_map = fcset.ndres_avail if group == "ndresAvail" else fcset.stu_avail
            for aid in known:
                if aid not in series_map:
                    bad(Diagnostic(aid, "forecast_missing", f"no {group} series in session {label}"))
            for aid, series in series_map.items():
                if aid not in known:
                    bad(Diagnostic(aid, "forecast_unknown_asset",
                                   f"{group} series in session {label} names an unknown asset"))
                    continue
                if len(series) != window:
                    bad(Diagnostic(aid, "forecast_window",
                                   f"{group} series in session {label} spans {len(series)} periods, "
                                   f"expected {window}"))
                    continue
                if min(series) < 0:
                    bad(Diagnostic(aid, "forecast_negative",
                                   f"negative availability in session {label}"))
        for a in s.ndres:
            series = fcset.ndres_avail.get(a.id)
            if series is None or len(series) != window or len(a.p_min) != T:
                continue
            for i, avail in enumerate(series):
                if a.p_min[tau - 1 + i] > avail + 1e-9:
                    bad(Diagnostic(a.id, "availability_below_min",
                                   f"availability {avail} below technical minimum "
                                   f"{a.p_min[tau - 1 + i]} in period {tau + i} ({label})"))
                    break

    return out


def _connected(net: Network) -> bool:
    if len(net.buses) <= 1:
        return True
    adjacency: dict[str, set[str]] = {b: set() for b in net.buses}
    for l in net.lines:
        if l.from_bus in adjacency and l.to_bus in adjacency:
            adjacency[l.from_bus].add(l.to_bus)
            adjacency[l.to_bus].add(l.from_bus)
    seen = {net.buses[0]}
    stack = [net.buses[0]]
    while stack:
        for nb in adjacency[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(net.buses)
