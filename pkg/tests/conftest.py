"""Shared scenario builders with hand-checkable optima.

The two-bus portfolio below is sized so the interesting quantities can be
verified with pencil and paper:

* day-ahead prices (30, 20, 40) all exceed the plant's 10 EUR/MWh variable
  cost, so the plant runs flat out in every period and pays one startup;
* wind availability (4, 6, 5) is sold in full;
* the flat consumption profile is cheaper to serve than the shifted one,
  so it wins at equal profile cost.

That puts the day-ahead optimum at 440 + 593 - 180 = 853 EUR.
"""

from __future__ import annotations

import copy

import pytest

from vppopt.scenario import Scenario, scenario_from_dict

TOY_DOC = {
    "name": "toy",
    "network": {
        "buses": ["b1", "b2"],
        "mainGridBuses": ["b1"],
        "lines": [
            {"id": "l1", "from": "b1", "to": "b2", "susceptance": 10.0, "flowLimit": 100.0},
        ],
        "tradeCap": {"b1": 50.0},
    },
    "dres": [
        {"id": "gen", "bus": "b2", "pMin": 2.0, "pMax": 10.0, "variableCost": 10.0,
         "startupCost": 7.0, "shutdownCost": 3.0, "initialCommitment": "off"},
    ],
    "ndres": [
        {"id": "wind", "bus": "b2", "pMin": 0.0},
    ],
    "stu": [],
    "demands": [
        {"id": "load", "bus": "b2",
         "profiles": [
             {"id": "flat", "power": [2.0, 2.0, 2.0], "cost": 0.0, "default": True},
             {"id": "shift", "power": [1.0, 2.0, 3.0], "cost": 0.0},
         ],
         "minEnergy": 6.0, "tolLo": 0.25, "tolHi": 0.25,
         "rampDown": 10.0, "rampUp": 10.0},
    ],
    "calendar": {
        "T": 3, "dtHours": 1.0,
        "damPrices": [30.0, 20.0, 40.0],
        "sessions": [
            {"k": 1, "tau": 1, "prices": [30.0, 20.0, 40.0]},
        ],
    },
    "forecasts": {
        "dam": {"ndresAvail": {"wind": [4.0, 6.0, 5.0]}, "stuAvail_th": {}},
        "idm": {
            "1": {"ndresAvail": {"wind": [4.0, 6.0, 5.0]}, "stuAvail_th": {}},
        },
    },
}

TOY_DAM_OBJECTIVE = 853.0


def toy_doc() -> dict:
    """A deep copy of the toy scenario document, safe to mutate."""
    return copy.deepcopy(TOY_DOC)


def make_scenario(doc: dict) -> Scenario:
    return scenario_from_dict(doc)


@pytest.fixture
def toy() -> Scenario:
    return make_scenario(toy_doc())


@pytest.fixture
def toy_zero_tol() -> Scenario:
    """Toy variant whose demand band is collapsed to the chosen profile."""
    doc = toy_doc()
    doc["demands"][0]["tolLo"] = 0.0
    doc["demands"][0]["tolHi"] = 0.0
    return make_scenario(doc)


def enumerate_dam_optimum(s: Scenario) -> float:
    """Best day-ahead objective found by exhausting every commitment
    pattern and profile choice, solving the residual LP for each.

    Exponential in dispatchable-unit periods; meant for tiny scenarios
    as an independent reference for the branch-and-bound answer.
    """
    import itertools

    from vppopt.dam import DEM_U, DRES_U, assemble_dam
    from vppopt.milp import solve

    model, reg = assemble_dam(s)
    slots = [(a.id, t) for a in s.dres for t in range(1, s.n_periods + 1)]
    profile_ids = [[p.id for p in d.profiles] for d in s.demands]
    best = None
    for pattern in itertools.product((0.0, 1.0), repeat=len(slots)):
        for chosen in itertools.product(*profile_ids):
            sub = model.copy()
            for (aid, t), val in zip(slots, pattern):
                sub.set_bounds(reg.id(DRES_U, aid, t), lb=val, ub=val)
            for d, pid in zip(s.demands, chosen):
                for p in d.profiles:
                    val = 1.0 if p.id == pid else 0.0
                    sub.set_bounds(reg.id(DEM_U, f"{d.id}/{p.id}"), lb=val, ub=val)
            sol = solve(sub)
            if sol.status == "optimal" and (best is None or sol.objective > best):
                best = sol.objective
    if best is None:
        raise AssertionError("every enumerated pattern was infeasible")
    return best
