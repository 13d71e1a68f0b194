"""Day-ahead commitment for one shipped study day.

Solves the day-ahead stage only and walks through the resulting market
position: hourly prices next to the committed trade, the on/off plan of
the dispatchable plants, and the consumption profile picked for every
flexible demand. Run with --day cloudy to see the same portfolio priced
on the harder day.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from vppopt.dam import DEM_U, DRES_P, DRES_U, TRADE_DAM, assemble_dam
from vppopt.milp import solve
from vppopt.scenario import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--day", choices=("clear", "cloudy"), default="clear")
    args = parser.parse_args()

    s = load_scenario(SCENARIO_DIR / f"{args.day}.json")
    model, reg = assemble_dam(s)
    sol = solve(model)
    if sol.status != "optimal":
        raise SystemExit(f"day-ahead solve ended with status {sol.status}")

    trade = [float(sol.values[reg.id(TRADE_DAM, "vpp", t)])
             for t in range(1, s.n_periods + 1)]
    print(f"{s.name} day: day-ahead objective {sol.objective:,.2f} EUR "
          f"({sol.runtime_s:.2f}s, {model.n_vars} variables)")
    print()
    print("hour  price   trade     hydro  biomass")
    for t in range(1, s.n_periods + 1):
        units = []
        for a in s.dres:
            on = sol.values[reg.id(DRES_U, a.id, t)] > 0.5
            p = sol.values[reg.id(DRES_P, a.id, t)]
            units.append(f"{p:7.1f}" if on else "    off")
        print(f"{t:4d} {s.calendar.dam_prices[t - 1]:6.2f} {trade[t - 1]:8.2f} "
              + " ".join(units))
    print()
    for d in s.demands:
        for p in d.profiles:
            if sol.values[reg.id(DEM_U, f"{d.id}/{p.id}")] > 0.5:
                print(f"{d.id}: serves the {p.id!r} profile "
                      f"({sum(p.power):.0f} MWh over the day)")


if __name__ == "__main__":
    main()
