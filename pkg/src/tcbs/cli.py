"""Command line: gen / solve / validate / bench.

Exit codes: 0 success, 1 infeasible / timeout / invalid solution,
2 usage or format error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .baselines import solve_decoupled, solve_greedy
from .bench import (DEFAULT_NODE_BUDGET, DEFAULT_TIME_LIMIT, SOLVERS, benchmark_specs,
                    format_summary, run_benchmark, summarize)
from .grid import MapFormatError, UnreachableError
from .model import validate_solution
from .oracle import brute_force_solve
from .scenario import (FormatError, GenerationError, ScenarioSpec, dump_problem, dump_solution,
                       gen_scenario, load_problem, load_solution)
from .search import NN2, OPTIMAL, BudgetExceeded, SolverConfig, solve
from .spacetime import InfeasibleError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as f:
        return f.read()


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)


def _load_problem(args):
    map_text = _read(args.map_file) if getattr(args, "map_file", None) else None
    return load_problem(_read(args.scenario), map_text)


def cmd_gen(args) -> int:
    spec = ScenarioSpec(args.seed, args.width, args.height, args.density, args.agents, args.tasks)
    _write(args.out, dump_problem(gen_scenario(spec)))
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = _load_problem(args)
    config = SolverConfig(node_budget=args.node_budget, time_limit=args.time_limit)
    if args.solver == "tcbs":
        res = solve(problem, config)
    elif args.solver == "tcbs-nn2":
        res = solve(problem, SolverConfig(NN2, node_budget=args.node_budget,
                                          time_limit=args.time_limit))
    elif args.solver == "greedy":
        res = solve_greedy(problem, config)
    elif args.solver == "decoupled":
        res = solve_decoupled(problem, config)
    else:
        sol = brute_force_solve(problem).solution
        _write(args.out, dump_solution(sol))
        return EXIT_OK
    _write(args.out, dump_solution(res.solution))
    st = res.stats
    logging.info("cost %d, %d nodes expanded, %.1f ms", res.solution.total_cost,
                 st.nodes_expanded, st.wall_time * 1e3)
    return EXIT_OK


def cmd_validate(args) -> int:
    problem = _load_problem(args)
    sol = load_solution(_read(args.solution))
    report = validate_solution(problem, sol, strict=args.strict)
    print(report)
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_bench(args) -> int:
    specs = benchmark_specs(args.scenarios, args.tasks, args.seed, args.width, args.height,
                            args.density, args.agents)
    config = SolverConfig(node_budget=args.node_budget, time_limit=args.time_limit)
    records = run_benchmark(specs, args.solvers, args.out, config, use_oracle=not args.no_oracle)
    print(format_summary(summarize(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tcbs", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random scenario JSON")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--width", type=int, default=8)
    g.add_argument("--height", type=int, default=8)
    g.add_argument("--density", type=float, default=0.2)
    g.add_argument("--agents", type=int, default=3)
    g.add_argument("--tasks", type=int, default=2)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve a scenario JSON")
    s.add_argument("--solver", choices=SOLVERS + ("oracle",), default="tcbs")
    s.add_argument("--in", dest="scenario", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--map-file", default=None, help="map text overriding the JSON obstacles")
    s.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    s.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a solution against a scenario")
    v.add_argument("--scenario", required=True)
    v.add_argument("--solution", required=True)
    v.add_argument("--map-file", default=None)
    v.add_argument("--strict", action="store_true",
                   help="bind agents to any pending task whose start they pass")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bench", help="regret / planning-time benchmark to CSV")
    b.add_argument("--scenarios", type=int, default=30)
    b.add_argument("--tasks", type=int, nargs="+", default=[2, 3])
    b.add_argument("--seed", type=int, default=0, help="first scenario seed")
    b.add_argument("--width", type=int, default=8)
    b.add_argument("--height", type=int, default=8)
    b.add_argument("--density", type=float, default=0.2)
    b.add_argument("--agents", type=int, default=3)
    b.add_argument("--solvers", nargs="+", choices=SOLVERS, default=list(SOLVERS))
    b.add_argument("--out", default="bench.csv")
    b.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    b.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    b.add_argument("--no-oracle", action="store_true",
                   help="never use the exhaustive solver as optimal reference")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FormatError, MapFormatError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, UnreachableError, BudgetExceeded, GenerationError) as e:
        print(f"failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
