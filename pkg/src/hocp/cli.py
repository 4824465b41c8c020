"""Command-line interface: solve, simulate, sweep and check.

Exit codes: 0 success/converged, 1 failed checks, 2 non-converged solve,
3 infeasible run, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .artifacts import (
    fmt_num,
    round12,
    write_solution_artifacts,
    write_sweep_artifacts,
)
from .config import RunConfig, default_config, load_config
from .diagnostics import run_checks
from .errors import (
    ConfigError,
    InfeasibleScheduleError,
    NoCrossingError,
    TransversalityError,
)
from .solver import grid_search_ts2, simulate, solve

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_NON_CONVERGED = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hocp",
        description="Hybrid optimal control of a four-phase epidemic model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="configuration file (defaults reproduce "
                                        "the published experiment)")
        p.add_argument("--out", help="output directory (default $HOCP_OUT_DIR "
                                     "or ./hocp-out)")
        p.add_argument("--h", type=float, dest="h_step",
                       help="integration step in days")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")

    p_solve = sub.add_parser("solve", help="optimize controls and t_s2")
    common(p_solve)
    p_solve.add_argument("--ts2", type=float,
                         help="initial guess for the controlled switching time")
    p_solve.set_defaults(func=_cmd_solve)

    p_sim = sub.add_parser("simulate", help="open-loop forward run, no "
                                            "optimization")
    common(p_sim)
    p_sim.add_argument("--ts2", type=float,
                       help="controlled switching time (default: first "
                            "crossing + 3 days)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="cost curve over a t_s2 range")
    common(p_sweep)
    p_sweep.add_argument("--range", dest="ts2_range", required=True,
                         help="lo,hi range of t_s2 in days")
    p_sweep.add_argument("--n", type=int, required=True,
                         help="number of grid candidates")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_check = sub.add_parser("check", help="run the invariant suite")
    common(p_check)
    p_check.set_defaults(func=_cmd_check)
    return parser


def _resolve_out(args) -> Path:
    out = args.out or os.environ.get("HOCP_OUT_DIR") or "hocp-out"
    return Path(out)


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.h_step is not None:
        cfg = RunConfig(model=cfg.model,
                        solver=replace(cfg.solver, h=args.h_step))
        problems = cfg.validate()
        if problems:
            raise ConfigError(problems)
    return cfg


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _cmd_solve(args) -> int:
    cfg = _load(args)
    solver_cfg = cfg.solver
    if getattr(args, "ts2", None) is not None:
        solver_cfg = replace(solver_cfg, ts2_init=args.ts2)
    sol = solve(cfg.model, solver_cfg)
    out = _resolve_out(args)
    write_solution_artifacts(out, sol, cfg)
    ts = sol.switching.times
    _say(args, f"status: {'converged' if sol.converged else 'non-converged'}"
               f" in {sol.iterations} sweeps")
    _say(args, f"switching times: ts1={fmt_num(ts[0])} ts2={fmt_num(ts[1])} "
               f"ts3={fmt_num(ts[2])}")
    _say(args, f"total cost: {fmt_num(sol.cost.total)}")
    _say(args, f"artifacts: {out}")
    return EXIT_OK if sol.converged else EXIT_NON_CONVERGED


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    sol = simulate(cfg.model, cfg.solver, profiles=None, ts2=args.ts2)
    out = _resolve_out(args)
    write_solution_artifacts(out, sol, cfg)
    ts = sol.switching.times
    _say(args, f"switching times: ts1={fmt_num(ts[0])} ts2={fmt_num(ts[1])} "
               f"ts3={fmt_num(ts[2])}")
    _say(args, f"total cost: {fmt_num(sol.cost.total)}")
    _say(args, f"artifacts: {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    try:
        lo_s, hi_s = args.ts2_range.split(",")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError as exc:
        raise ConfigError(f"--range expects 'lo,hi', got {args.ts2_range!r}") \
            from exc
    result = grid_search_ts2(cfg.model, cfg.solver, lo, hi, args.n)
    out = _resolve_out(args)
    write_sweep_artifacts(out, result, cfg.solver.tol_hgap)
    if args.n > 1:
        _say(args, f"best ts2: {fmt_num(result.best_ts2)} "
                   f"(J = {fmt_num(result.costs[result.best_index])})")
    _say(args, f"artifacts: {out}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = _load(args)
    report = run_checks(cfg)
    out = _resolve_out(args)
    out.mkdir(parents=True, exist_ok=True)
    payload = round12({
        "ok": report.ok,
        "checks": [
            {"name": r.name, "passed": r.passed, "detail": r.detail}
            for r in report.results
        ],
    })
    (out / "check_report.json").write_text(json.dumps(payload, indent=2) + "\n")
    for r in report.results:
        _say(args, f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    _say(args, f"artifacts: {out}")
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoCrossingError, InfeasibleScheduleError, TransversalityError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
