"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or schema error,
3 numerical-configuration failure.
"""

from __future__ import annotations

import argparse
import sys
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import io
from .allocation import (
    BruteForceUtilitarian,
    EllipsoidConfig,
    GreedyUtilitarian,
    RandomizedUtilitarian,
    StochasticAllocation,
    brute_force_stochastic_leximin,
    expected_utilities,
    solve_stochastic_leximin,
)
from .ellipsoid import NoFeasiblePoint
from .linprog import LpError, solve
from .order import TOL, ApproxFactors, is_leximin_preferred, leximin_maximum
from .ordered_outcomes import (
    OpFailure,
    RandomizedOp,
    ScriptedOp,
    default_probes,
    exact_op,
    noisy_op,
    run_ordered_outcomes,
)
from .programs import MultiObjectiveProblem
from .saturation import IterationCapExceeded, saturation_solve, scaled_solver

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path | None
    output: Path | None
    seed: int
    factors: ApproxFactors
    p: float
    tolerance: float
    max_iter: int | None
    radius: float | None
    iterations: int | None


def named_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator for the stream called ``name`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),)))


def _config(args: argparse.Namespace) -> RunConfig:
    try:
        factors = ApproxFactors(args.alpha, args.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not (0.0 < args.p <= 1.0):
        raise UsageError(f"--p must lie in (0, 1], got {args.p}")
    return RunConfig(
        command=args.command,
        input=args.input,
        output=args.output,
        seed=args.seed,
        factors=factors,
        p=args.p,
        tolerance=args.tolerance,
        max_iter=args.max_iter,
        radius=getattr(args, "radius", None),
        iterations=getattr(args, "iterations", None),
    )


def _emit(cfg: RunConfig, doc: Any, table: str) -> None:
    text = io.dumps(doc)
    if cfg.output is not None:
        cfg.output.write_text(text)
        print(table)
    else:
        print(table, file=sys.stderr)
        sys.stdout.write(text)


def _load_input(cfg: RunConfig) -> Any:
    if cfg.input is None:
        raise UsageError("--input is required")
    return io.load_json(cfg.input)


def _is_instance(doc: Any) -> bool:
    return isinstance(doc, dict) and "utilities" in doc and "n" in doc


def _fmt(values) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in values) + ")"


# ---------------------------------------------------------------------------
# commands


def cmd_leximin(cfg: RunConfig, op_name: str, trace: Path | None) -> int:
    problem = io.problem_from_json(_load_input(cfg))
    if op_name == "exact":
        op = exact_op
    elif op_name == "noisy":
        op = noisy_op(exact_op, cfg.factors, int(named_rng(cfg.seed, "noisy-op").integers(2**32)))
    else:
        if trace is None:
            raise UsageError("--op scripted needs --trace")
        op = ScriptedOp(io.trace_from_json(io.load_json(trace)), cfg.factors)
    if cfg.p < 1.0:
        op = RandomizedOp(op, cfg.p, int(named_rng(cfg.seed, "randomized-op").integers(2**32)))
    result = run_ordered_outcomes(problem, op)
    lines = [f"sorted utilities {_fmt(result.sorted_utilities)}", f"z {_fmt(result.ledger.z)}"]
    lines.append(f"claimed factors alpha={result.claimed_factors.alpha:.6g} epsilon={result.claimed_factors.epsilon:.6g}")
    _emit(cfg, io.result_to_json(result), "\n".join(lines))
    return EXIT_OK


def _utilitarian(name: str, cfg: RunConfig):
    base = GreedyUtilitarian() if name == "greedy" else BruteForceUtilitarian()
    if cfg.p < 1.0:
        return RandomizedUtilitarian(base, cfg.p, int(named_rng(cfg.seed, "utilitarian").integers(2**32)))
    return base


def cmd_allocate(cfg: RunConfig, utilitarian: str, dump_cuts: Path | None) -> int:
    instance = io.instance_from_json(_load_input(cfg))
    logs = []
    result = solve_stochastic_leximin(
        instance, _utilitarian(utilitarian, cfg), EllipsoidConfig(cfg.radius, cfg.iterations), logs
    )
    if dump_cuts is not None:
        dump_cuts.write_text(io.dumps({"iterations": [log.to_json() for log in logs]}))
    table = "\n".join(
        [f"claimed alpha {result.claimed_factors.alpha:.6g}", f"sorted expected utilities {_fmt(result.sorted_utilities)}"]
        + [f"  p={p:.6g}  owner={list(a.owner)}" for a, p in sorted(result.solution.support, key=lambda s: s[0].owner)]
    )
    _emit(cfg, io.allocation_result_to_json(result), table)
    return EXIT_OK


def _probe_utilities(doc: Any, probes_doc: Any) -> list[np.ndarray]:
    if _is_instance(doc):
        instance = io.instance_from_json(doc)
        if probes_doc is None:
            dists = [StochasticAllocation.point_mass(a) for a in instance.all_allocations()]
        else:
            dists = [io.distribution_from_json(p["support"] if isinstance(p, dict) else p) for p in probes_doc["probes"]]
        return [expected_utilities(d, instance) for d in dists]
    problem = io.problem_from_json(doc)
    points = default_probes(problem) if probes_doc is None else probes_doc["probes"]
    out = []
    for i, x in enumerate(points):
        if problem.kind == "linear":
            x = np.asarray(x, dtype=float)
        if not problem.contains(x):
            raise UsageError(f"probe {i} is not a feasible point")
        out.append(problem.utilities(x))
    return out


def cmd_check(cfg: RunConfig, result_path: Path | None, probes_path: Path | None, factors_given: bool) -> int:
    if result_path is None:
        raise UsageError("check needs --result")
    doc = _load_input(cfg)
    utilities, claimed = io.result_utilities_from_json(io.load_json(result_path))
    factors = cfg.factors if factors_given or claimed is None else claimed
    probes_doc = io.load_json(probes_path) if probes_path is not None else None
    violations = 0
    for i, u in enumerate(_probe_utilities(doc, probes_doc)):
        w = is_leximin_preferred(u, utilities, factors, cfg.tolerance)
        if w is not None:
            violations += 1
            print(f"probe {i} {_fmt(u)} is preferred: k={w.k} margin={w.margin:.6g}")
    verdict = "violated" if violations else "verified"
    print(f"{verdict} at alpha={factors.alpha:.12g} epsilon={factors.epsilon:.12g}")
    return EXIT_VERIFY if violations else EXIT_OK


def cmd_bruteforce(cfg: RunConfig, cap: int) -> int:
    doc = _load_input(cfg)
    if _is_instance(doc):
        instance = io.instance_from_json(doc)
        try:
            result = brute_force_stochastic_leximin(instance, cap)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        _emit(cfg, io.allocation_result_to_json(result), f"sorted expected utilities {_fmt(result.sorted_utilities)}")
        return EXIT_OK
    problem = io.problem_from_json(doc)
    if problem.kind == "finite":
        best = leximin_maximum(problem.candidates.tolist())
        u = problem.candidates[best]
        out = {"solution": best, "utilities": u.tolist(), "sorted_utilities": sorted(u.tolist())}
        _emit(cfg, out, f"candidate {best} with sorted utilities {_fmt(sorted(u))}")
        return EXIT_OK
    result = run_ordered_outcomes(problem, exact_op)
    _emit(cfg, io.result_to_json(result), f"sorted utilities {_fmt(result.sorted_utilities)}")
    return EXIT_OK


def cmd_solve_lp(cfg: RunConfig, exact: bool) -> int:
    lp = io.lp_from_json(_load_input(cfg))
    sol = solve(lp, exact=exact)
    table = f"status {sol.status}" + (f", objective {float(sol.objective_value):.10g}" if sol.optimal else "")
    _emit(cfg, io.lp_solution_to_json(sol), table)
    return EXIT_OK


def cmd_demo_saturation(cfg: RunConfig, noise: float) -> int:
    problem = MultiObjectiveProblem.linear([([1.0, 1.0], "<=", 1.0)], [[1.0, 0.0], [0.0, 1.0]])
    print("exact solver")
    exact = saturation_solve(problem, cfg.max_iter)
    print(f"  converged after {len(exact.rounds)} round(s) to {_fmt(exact.utilities)}")
    if noise <= 0.0:
        return EXIT_OK
    print(f"solver reporting {1.0 - noise:g} of the optimum")
    try:
        res = saturation_solve(problem, cfg.max_iter, solver=scaled_solver(1.0 - noise))
        print(f"  converged after {len(res.rounds)} round(s) to {_fmt(res.utilities)}")
    except IterationCapExceeded as exc:
        first = exc.rounds[0]
        tests = ", ".join(f"{v:.6g}" for v in first.tests.values())
        print(f"  max-min level reported {first.level:.6g}, saturation tests returned {tests}")
        print(f"  iteration cap reached after {len(exc.rounds)} rounds: {exc}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path)
    common.add_argument("--output", type=Path)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alpha", type=float, default=1.0)
    common.add_argument("--epsilon", type=float, default=0.0)
    common.add_argument("--p", type=float, default=1.0)
    common.add_argument("--tolerance", type=float, default=TOL)
    common.add_argument("--max-iter", type=int, default=None)

    parser = argparse.ArgumentParser(prog="leximin-approx", description="Leximin approximation tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("leximin", parents=[common], help="run the ordered-outcomes loop on a problem")
    p.add_argument("--op", choices=["exact", "noisy", "scripted"], default="exact")
    p.add_argument("--trace", type=Path)

    p = sub.add_parser("allocate", parents=[common], help="leximin-approximate stochastic allocation")
    p.add_argument("--utilitarian", choices=["greedy", "bruteforce"], default="greedy")
    p.add_argument("--dump-cuts", type=Path)
    p.add_argument("--radius", type=float)
    p.add_argument("--iterations", type=int)

    p = sub.add_parser("check", parents=[common], help="verify a result against probe points")
    p.add_argument("--result", type=Path)
    p.add_argument("--probes", type=Path)

    p = sub.add_parser("bruteforce", parents=[common], help="exact reference result by enumeration")
    p.add_argument("--cap", type=int, default=4096)

    p = sub.add_parser("solve-lp", parents=[common], help="solve a linear program with the simplex solver")
    p.add_argument("--exact", action="store_true", help="use rational arithmetic")

    p = sub.add_parser("demo-saturation", parents=[common], help="saturation loop with exact and inexact solvers")
    p.add_argument("--noise", type=float, default=0.02)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    argv_list = sys.argv[1:] if argv is None else argv
    try:
        cfg = _config(args)
        if args.command == "leximin":
            return cmd_leximin(cfg, args.op, args.trace)
        if args.command == "allocate":
            return cmd_allocate(cfg, args.utilitarian, args.dump_cuts)
        if args.command == "check":
            factors_given = any(a.startswith(("--alpha", "--epsilon")) for a in argv_list)
            return cmd_check(cfg, args.result, args.probes, factors_given)
        if args.command == "bruteforce":
            return cmd_bruteforce(cfg, args.cap)
        if args.command == "solve-lp":
            return cmd_solve_lp(cfg, args.exact)
        return cmd_demo_saturation(cfg, args.noise)
    except (UsageError, io.SchemaError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoFeasiblePoint, LpError, OpFailure) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
