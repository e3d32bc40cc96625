"""Command-line front end.

Exit statuses: 0 success, 2 invalid input, 3 runtime failure, 4 unreachable
target.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, oracle, scenario
from .engine import EngineError, simulate
from .fock import max_amplitude_difference
from .planner import UnreachableError, plan, route_hops
from .topology import TopologyError, to_dot

OK, INVALID, RUNTIME, UNREACHABLE = 0, 2, 3, 4
ORACLE_TOL = 1e-9


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _load(args) -> scenario.Scenario:
    if not args.scenario:
        raise _Fail(INVALID, "--scenario is required")
    try:
        sc = scenario.load(args.scenario)
    except OSError as exc:
        raise _Fail(INVALID, f"cannot read scenario: {exc}") from None
    except scenario.ScenarioError as exc:
        raise _Fail(INVALID, str(exc)) from None
    overrides = {}
    if getattr(args, "hop_cap", None) is not None:
        overrides["hop_cap"] = args.hop_cap
    if getattr(args, "max_ticks", None) is not None:
        overrides["max_ticks"] = args.max_ticks
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return replace(sc, **overrides) if overrides else sc


def _planned(sc: scenario.Scenario):
    """Plan a targets scenario; returns (topology, route plan, schedule)."""
    t = sc.topology()
    if len(sc.insertions) != 1:
        raise _Fail(INVALID, "planning needs exactly one insertion")
    rp, sched = plan(t, sc.insertions[0], list(sc.targets), sc.regime, sc.hop_cap)
    return t, rp, sched


def _expectations(sc: scenario.Scenario):
    if sc.expect:
        return [(e.ports, e.kind) for e in sc.expect]
    if sc.targets is not None:
        kind = sc.insertions[0].state
        return [(sc.targets, kind if kind.startswith(("phi", "psi")) else None)]
    return []


def cmd_simulate(args) -> int:
    sc = _load(args)
    t = sc.topology()
    if sc.targets is not None:
        t, rp, sched = _planned(sc)
        ticks = sc.max_ticks or rp.duration + 1
    else:
        sched, ticks = sc.phase_schedule(), sc.max_ticks
    final, trace = simulate(t, sc.insertions, sched, ticks)
    reach = analysis.count_reachable(t, sc.insertions[0], sc.hop_cap)
    report = analysis.format_report(sc.name, t, final, trace.norms, expectations=_expectations(sc),
                                    reach=reach, regime=sc.regime, ticks=ticks)
    if args.trace:
        Path(args.trace).write_text(trace.to_text(), encoding="utf-8")
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
    else:
        sys.stdout.write(report)
    return OK


def cmd_plan(args) -> int:
    sc = _load(args)
    if sc.targets is None:
        raise _Fail(INVALID, "plan needs a scenario with control.targets")
    _, rp, sched = _planned(sc)
    routes = tuple(f"{r.describe()} -> {r.target} (u-turns: {r.uturns})" for r in rp.routes)
    entries = tuple((u, s, k, phi) for (u, s, k), phi in sched.entries.items())
    kind = sc.insertions[0].state
    expect = sc.expect or (scenario.Expectation(sc.targets, kind if kind.startswith(("phi", "psi")) else None),)
    out = replace(sc, schedule=entries, targets=None, max_ticks=rp.duration + 1, expect=expect, routes=routes)
    text = scenario.dumps(out)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for line in routes:
        print(f"route: {line}", file=sys.stderr if not args.out else sys.stdout)
    return OK


def cmd_reach(args) -> int:
    sc = _load(args)
    t = sc.topology()
    ins = sc.insertions[0] if sc.insertions else analysis.central_insertion(t)
    passive, active = analysis.count_reachable(t, ins, sc.hop_cap)
    print(f"passive={passive} active={active}")
    return OK


def cmd_oracle_check(args) -> int:
    seed = args.seed
    if args.scenario:
        sc = _load(args)
        seed = sc.seed if seed is None else seed
        if sc.schedule is not None:
            t = sc.topology()
            final, _ = simulate(t, sc.insertions, sc.phase_schedule(), sc.max_ticks)
            ref = oracle.dense_oracle(t, sc.insertions, sc.phase_schedule(), sc.max_ticks)
            print(f"scenario {sc.name}: max_amplitude_deviation={max_amplitude_difference(final, ref):.3e}")
    result = oracle.oracle_check(1 if seed is None else seed, args.trials)
    print(f"trials={result['trials']} seed={result['seed']} "
          f"max_amplitude_deviation={result['max_amplitude_deviation']:.3e} "
          f"max_norm_deviation={result['max_norm_deviation']:.3e}")
    if result["max_amplitude_deviation"] >= ORACLE_TOL or result["max_norm_deviation"] >= ORACLE_TOL:
        raise _Fail(RUNTIME, "engine and dense oracle disagree")
    return OK


def cmd_export_dot(args) -> int:
    sc = _load(args)
    t = sc.topology()
    routes = []
    if sc.targets is not None:
        _, rp, _ = _planned(sc)
        routes = [[(a, b) for _, a, b in route_hops(t, r)] for r in rp.routes]
    text = to_dot(t, routes)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualrail", description="Dual-rail photonic routing simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *flags):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--scenario", help="scenario YAML file")
        for flag in flags:
            if flag in ("--hop-cap", "--max-ticks", "--seed", "--trials"):
                default = 100 if flag == "--trials" else None
                sp.add_argument(flag, type=int, default=default)
            else:
                sp.add_argument(flag)
        return sp

    add("simulate", cmd_simulate, "run a scenario, write trace and report",
        "--trace", "--report", "--max-ticks", "--hop-cap", "--seed")
    add("plan", cmd_plan, "plan a schedule for a targets scenario", "--out", "--hop-cap")
    add("reach", cmd_reach, "count reachable free ports (passive, active)", "--hop-cap")
    add("oracle-check", cmd_oracle_check, "compare the engine with the dense oracle", "--seed", "--trials")
    add("export-dot", cmd_export_dot, "write a Graphviz description", "--out", "--hop-cap")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return UNREACHABLE
    except (scenario.ScenarioError, TopologyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    except (EngineError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME


if __name__ == "__main__":
    sys.exit(main())
