"""JSON encodings of problems, results and allocation instances.

Schemas:

* LP: ``{"direction", "objective", "constraints": [{"coeffs", "rel", "rhs"}], "bounds": [[lo, hi]]}``;
  ``null`` bounds are infinite and omitted bounds mean ``x >= 0``.
* Multi-objective problem: ``{"kind": "linear", "constraints", "objectives"[, "bounds"]}``
  or ``{"kind": "finite", "candidates"}``.
* Allocation instance: ``{"n", "m", "utilities": [{"type": "additive", "values"} | {"type": "coverage", "sets"}]}``.
* Allocation output: ``{"support": [{"owner", "p"}], "expected_utilities", "claimed_alpha"}``.
* Trace for a scripted procedure: ``{"steps": [{"z", "x"}]}``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .allocation import AllocationInstance, SimpleAllocation, StochasticAllocation, ValueOracle
from .linprog import LinearProgram, LpSolution
from .order import ApproxFactors
from .ordered_outcomes import LeximinResult
from .programs import MultiObjectiveProblem


class SchemaError(ValueError):
    """The JSON document does not have the expected shape."""


def load_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def dumps(doc: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _require(doc: dict, key: str, where: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def _num(v: float) -> float | None:
    return None if v is None or math.isinf(v) else float(v)


def _bound(v) -> float | None:
    if v is None:
        return None
    return float(v)


def _constraints(raw: list, where: str) -> list[tuple[list[float], str, float]]:
    if not isinstance(raw, list):
        raise SchemaError(f"{where}: constraints must be a list")
    out = []
    for i, c in enumerate(raw):
        rel = _require(c, "rel", f"{where}.constraints[{i}]")
        if rel not in ("<=", ">=", "==", "="):
            raise SchemaError(f"{where}.constraints[{i}]: unknown relation {rel!r}")
        out.append(([float(v) for v in _require(c, "coeffs", where)], rel, float(_require(c, "rhs", where))))
    return out


def _bounds(raw, where: str):
    if raw is None:
        return None
    try:
        return [(_bound(lo), _bound(hi)) for lo, hi in raw]
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}: bounds must be [lo, hi] pairs") from exc


# ---------------------------------------------------------------------------
# linear programs


def lp_from_json(doc: dict) -> LinearProgram:
    try:
        return LinearProgram.build(
            _require(doc, "direction", "lp"),
            [float(v) for v in _require(doc, "objective", "lp")],
            _constraints(doc.get("constraints", []), "lp"),
            _bounds(doc.get("bounds"), "lp"),
        )
    except SchemaError:
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"lp: {exc}") from exc


def lp_to_json(lp: LinearProgram) -> dict:
    rel = {"=": "=="}
    return {
        "direction": lp.direction,
        "objective": [float(v) for v in lp.c],
        "constraints": [
            {"coeffs": [float(v) for v in lp.A[i]], "rel": rel.get(lp.rel[i], lp.rel[i]), "rhs": float(lp.b[i])}
            for i in range(lp.num_rows)
        ],
        "bounds": [[_num(lo), _num(hi)] for lo, hi in zip(lp.lower, lp.upper)],
    }


def lp_solution_to_json(sol: LpSolution) -> dict:
    out: dict[str, Any] = {"status": sol.status, "pivots": sol.pivots}
    if sol.optimal:
        out["x"] = [float(v) for v in sol.x]
        out["objective"] = float(sol.objective_value)
        if isinstance(sol.objective_value, Fraction):
            out["exact_objective"] = str(sol.objective_value)
            out["exact_x"] = [str(v) for v in sol.x]
    return out


# ---------------------------------------------------------------------------
# multi-objective problems and results


def problem_from_json(doc: dict) -> MultiObjectiveProblem:
    kind = _require(doc, "kind", "problem")
    try:
        if kind == "finite":
            return MultiObjectiveProblem.finite(_require(doc, "candidates", "problem"))
        if kind == "linear":
            return MultiObjectiveProblem.linear(
                _constraints(_require(doc, "constraints", "problem"), "problem"),
                _require(doc, "objectives", "problem"),
                _bounds(doc.get("bounds"), "problem"),
            )
    except SchemaError:
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"problem: {exc}") from exc
    raise SchemaError(f"problem: unknown kind {kind!r}")


def problem_to_json(problem: MultiObjectiveProblem) -> dict:
    if problem.kind == "finite":
        return {"kind": "finite", "candidates": problem.candidates.tolist()}
    region = lp_to_json(problem.region)
    return {
        "kind": "linear",
        "constraints": region["constraints"],
        "objectives": problem.objectives.tolist(),
        "bounds": region["bounds"],
    }


def _point(x) -> Any:
    if isinstance(x, (int, np.integer)):
        return int(x)
    return [float(v) for v in np.asarray(x, dtype=float)]


def result_to_json(result: LeximinResult) -> dict:
    return {
        "solution": _point(result.solution),
        "utilities": [float(v) for v in result.utilities],
        "sorted_utilities": [float(v) for v in result.sorted_utilities],
        "z": [float(v) for v in result.ledger.z],
        "claimed_factors": {"alpha": result.claimed_factors.alpha, "epsilon": result.claimed_factors.epsilon},
        "claimed_probability": float(result.claimed_probability),
    }


def result_utilities_from_json(doc: dict) -> tuple[np.ndarray, ApproxFactors | None]:
    """The utility vector of a stored result and its claimed factors if present."""
    if "utilities" in doc:
        u = np.asarray(doc["utilities"], dtype=float)
    elif "expected_utilities" in doc:
        u = np.asarray(doc["expected_utilities"], dtype=float)
    else:
        raise SchemaError("result: missing field 'utilities'")
    factors = None
    if "claimed_factors" in doc:
        cf = doc["claimed_factors"]
        factors = ApproxFactors(float(cf["alpha"]), float(cf.get("epsilon", 0.0)))
    elif "claimed_alpha" in doc:
        factors = ApproxFactors(float(doc["claimed_alpha"]), 0.0)
    return u, factors


def trace_from_json(doc: dict) -> list[tuple[float, Any]]:
    steps = _require(doc, "steps", "trace")
    return [(float(_require(s, "z", "trace.steps")), _require(s, "x", "trace.steps")) for s in steps]


# ---------------------------------------------------------------------------
# allocation


def instance_from_json(doc: dict) -> AllocationInstance:
    n = int(_require(doc, "n", "instance"))
    m = int(_require(doc, "m", "instance"))
    raw = _require(doc, "utilities", "instance")
    if not isinstance(raw, list) or len(raw) != n:
        raise SchemaError(f"instance: expected {n} utility entries")
    oracles = []
    for j, u in enumerate(raw):
        kind = _require(u, "type", f"instance.utilities[{j}]")
        if kind == "additive":
            values = _require(u, "values", f"instance.utilities[{j}]")
            if len(values) != m:
                raise SchemaError(f"instance.utilities[{j}]: expected {m} values")
            oracles.append(ValueOracle.additive(values))
        elif kind == "coverage":
            sets = _require(u, "sets", f"instance.utilities[{j}]")
            if len(sets) != m:
                raise SchemaError(f"instance.utilities[{j}]: expected {m} sets")
            oracles.append(ValueOracle.coverage(sets))
        else:
            raise SchemaError(f"instance.utilities[{j}]: unknown type {kind!r}")
    try:
        return AllocationInstance(n, m, oracles)
    except ValueError as exc:
        raise SchemaError(f"instance: {exc}") from exc


def instance_to_json(instance: AllocationInstance) -> dict:
    utilities = []
    for u in instance.oracles:
        if u.kind == "additive":
            utilities.append({"type": "additive", "values": list(u.data)})
        elif u.kind == "coverage":
            utilities.append({"type": "coverage", "sets": [sorted(s) for s in u.data]})
        else:
            raise SchemaError(f"cannot encode utility of kind {u.kind!r}")
    return {"n": instance.n, "m": instance.m, "utilities": utilities}


def distribution_to_json(dist: StochasticAllocation) -> list[dict]:
    return [{"owner": list(a.owner), "p": float(p)} for a, p in sorted(dist.support, key=lambda s: s[0].owner)]


def distribution_from_json(raw: list) -> StochasticAllocation:
    try:
        return StochasticAllocation(tuple((SimpleAllocation(tuple(int(v) for v in s["owner"])), float(s["p"])) for s in raw))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"support: {exc}") from exc


def allocation_result_to_json(result: LeximinResult) -> dict:
    return {
        "support": distribution_to_json(result.solution),
        "expected_utilities": [float(v) for v in result.utilities],
        "claimed_alpha": float(result.claimed_factors.alpha),
        "claimed_probability": float(result.claimed_probability),
        "z": [float(v) for v in result.ledger.z],
    }
