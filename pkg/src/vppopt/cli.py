"""Command-line entry points.

Three subcommands: ``run`` executes a scenario in VPP or no-coordination
mode and writes the report file set; ``sweep`` searches the largest
payment at which a demand profile is still selected; ``validate`` checks
a scenario file and prints its diagnostics.

Exit codes: 0 success, 2 usage or input errors, 3 an infeasible session,
4 a solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from vppopt import dam as dam_mod
from vppopt.milp import SolveOptions, dump_lp
from vppopt.orchestrator import RunConfig, run, session_keys, sweep_profile_costs
from vppopt.report import build_report, emit_report, emit_thresholds
from vppopt.scenario import ScenarioError, ScenarioValidationError, load_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4


def parse_sessions(text: str) -> tuple[str, ...]:
    """Expand "dam,idm1..idm3" style lists into explicit session keys."""
    out: list[str] = []
    for token in text.split(","):
        token = token.strip()
        if ".." in token:
            lo, hi = token.split("..", 1)
            if not (lo.startswith("idm") and hi.startswith("idm")):
                raise ValueError(f"bad session range {token!r}")
            for k in range(int(lo[3:]), int(hi[3:]) + 1):
                out.append(f"idm{k}")
        elif token:
            out.append(token)
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vppopt",
        description="Day-ahead and intraday market scheduling for renewable "
                    "virtual power plants.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve a scenario and write report files")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path")
    p_run.add_argument("--mode", choices=("vpp", "nocoord"), default="vpp")
    p_run.add_argument("--sessions", default=None,
                       help="prefix of the session order, e.g. dam,idm1..idm3")
    p_run.add_argument("--out", default=None, help="report directory")
    p_run.add_argument("--gap", type=float, default=1e-6, help="relative MIP gap")
    p_run.add_argument("--time-limit", type=float, default=60.0, help="seconds per solve")
    p_run.add_argument("--dump-model", default=None,
                       help="write the day-ahead model in LP format to this path")

    p_sweep = sub.add_parser("sweep", help="find a profile's cost threshold")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--demand", required=True, help="demand asset id")
    p_sweep.add_argument("--profile", required=True, help="non-default profile id")
    p_sweep.add_argument("--max", type=float, required=True, help="largest cost probed")
    p_sweep.add_argument("--step", type=float, default=1.0, help="bisection resolution")
    p_sweep.add_argument("--out", default=None, help="directory for thresholds.csv")

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("--scenario", required=True)
    return parser


def _load(path: str):
    try:
        return load_scenario(path)
    except ScenarioValidationError as exc:
        print(f"invalid scenario {path}:", file=sys.stderr)
        for diag in exc.diagnostics:
            print(f"  {diag}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except (ScenarioError, OSError) as exc:
        print(f"cannot load scenario {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    try:
        sessions = parse_sessions(args.sessions) if args.sessions else None
        if sessions is not None:
            session_keys(scenario, sessions)  # fail fast on bad prefixes
    except ValueError as exc:
        print(f"bad --sessions: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.dump_model:
        model, _ = dam_mod.assemble_dam(scenario)
        dump_lp(model, args.dump_model)
        print(f"model written to {args.dump_model}")

    cfg = RunConfig(mode=args.mode, sessions=sessions,
                    options=SolveOptions(gap_tol=args.gap, time_limit=args.time_limit))
    result = run(scenario, cfg)

    out_dir = args.out or f"{Path(args.scenario).stem}-{args.mode}-report"
    report = build_report(scenario, result)
    emit_report(report, out_dir)

    for sess in result.sessions:
        objective = "-" if sess.objective is None else f"{sess.objective:.2f}"
        print(f"{sess.key}: {sess.status} objective={objective} "
              f"({sess.runtime_s:.2f}s, {len(sess.violations)} violations)")
    print(f"total profit: {report.total_profit:.2f}")
    print(f"report written to {out_dir}")

    if result.failure is not None:
        failed = next(r for r in result.sessions if r.key == result.failure)
        print(f"run stopped at {result.failure}: {failed.status}", file=sys.stderr)
        return EXIT_INFEASIBLE if failed.status == "infeasible" else EXIT_SOLVER
    if any(r.violations for r in result.sessions) or report.verifier_summary():
        print("verification found violations; see verify.json", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    try:
        entries = sweep_profile_costs(scenario, demand_id=args.demand,
                                      profile_id=args.profile, max_cost=args.max,
                                      resolution=args.step)
    except KeyError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    out_dir = args.out or f"{Path(args.scenario).stem}-sweep"
    path = emit_thresholds(entries, out_dir)
    for e in entries:
        if e.status == "threshold":
            print(f"{e.demand_id}/{e.profile_id}: threshold {e.threshold:.2f} EUR "
                  f"(resolution {e.resolution:g})")
        else:
            print(f"{e.demand_id}/{e.profile_id}: {e.status}")
    print(f"thresholds written to {path}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    _load(args.scenario)  # exits 2 with diagnostics when invalid
    print(f"{args.scenario}: ok")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
