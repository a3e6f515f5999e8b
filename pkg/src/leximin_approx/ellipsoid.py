"""Ellipsoid method over a dual LP given only by a separation oracle.

The dual ``max b.y  s.t.  a.y <= rhs`` for rows ``a`` that are produced on
demand by an oracle.  Rows the oracle reports are logged; afterwards the
primal restricted to the logged columns is small enough to solve directly,
and its solution extended by zeros is feasible for the full primal.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Hashable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .linprog import LinearProgram

# below this, g^T P g means the ellipsoid has collapsed along the cut direction
_DEGENERATE = 1e-300


class NoFeasiblePoint(RuntimeError):
    """No center was approximately feasible; the radius or iteration budget is wrong."""


@dataclass(frozen=True)
class Violated:
    """A dual row ``row . y <= rhs`` that the queried point breaks.

    ``key`` names the primal column the row belongs to, or is ``None`` for
    rows of always-present primal variables.
    """

    row: np.ndarray
    rhs: float
    key: Hashable | None = None


@dataclass(frozen=True)
class ApproxFeasible:
    pass


APPROX_FEASIBLE = ApproxFeasible()

SeparationResponse = Violated | ApproxFeasible


@dataclass(frozen=True)
class OracleContract:
    """Rows hold within a factor ``1 + beta`` on ApproxFeasible, with probability ``p``."""

    beta: float = 0.0
    p: float = 1.0

    def __post_init__(self) -> None:
        if self.beta < 0.0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"p must lie in (0, 1], got {self.p}")


Oracle = Callable[[np.ndarray], SeparationResponse]


@dataclass
class EllipsoidState:
    """``{y : (y - center)^T shape^{-1} (y - center) <= 1}`` after ``k`` cuts."""

    center: np.ndarray
    shape: np.ndarray
    k: int = 0

    @property
    def log_det(self) -> float:
        sign, value = np.linalg.slogdet(self.shape)
        return value if sign > 0 else -np.inf


@dataclass(frozen=True)
class CutRecord:
    kind: str  # "feasibility", "optimality" or "seed"
    iteration: int
    key: Hashable | None = None
    row: np.ndarray | None = None
    rhs: float | None = None


@dataclass
class CutLog:
    entries: list[CutRecord] = field(default_factory=list)
    seeds: list[CutRecord] = field(default_factory=list)

    def feasibility_keys(self) -> list[Hashable]:
        """Keys of logged column rows, seeds first, without duplicates."""
        keys: list[Hashable] = []
        seen = set()
        for rec in self.seeds + self.entries:
            if rec.key is not None and rec.key not in seen:
                seen.add(rec.key)
                keys.append(rec.key)
        return keys

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        def enc(rec: CutRecord) -> dict:
            out = {"kind": rec.kind, "iteration": rec.iteration}
            if rec.key is not None:
                out["key"] = list(rec.key) if isinstance(rec.key, tuple) else rec.key
            if rec.row is not None:
                out["row"] = [float(v) for v in rec.row]
                out["rhs"] = float(rec.rhs)
            return out

        return {"seeds": [enc(r) for r in self.seeds], "cuts": [enc(r) for r in self.entries]}


@dataclass
class EllipsoidResult:
    best_point: np.ndarray
    best_value: float
    best_iteration: int
    cut_log: CutLog
    state: EllipsoidState
    log_dets: list[float]


def default_iterations(dim: int, radius: float, inner_radius: float | None = None) -> int:
    """Iteration budget ``ceil(2 d (d + 1) ln(R / r))`` with ``r = 1e-6 R`` by default."""
    r = 1e-6 * radius if inner_radius is None else inner_radius
    return max(1, math.ceil(2 * dim * (dim + 1) * math.log(radius / r)))


def ellipsoid_maximize(
    objective: Sequence[float] | np.ndarray,
    oracle: Oracle,
    radius: float,
    iterations: int | None = None,
    center: Sequence[float] | np.ndarray | None = None,
) -> EllipsoidResult:
    """Maximize ``objective . y`` over the region the oracle describes.

    Each center is sent to the oracle.  A violated row gives a central
    feasibility cut through that row; an approximately feasible center gives
    an optimality cut keeping only points at least as good.  The best
    approximately feasible center is returned (earliest on ties).

    Args:
        objective: The dual objective vector.
        oracle: Maps a point to ``Violated`` or ``ApproxFeasible``.
        radius: Radius of the starting ball; it must contain the feasible region.
        iterations: Number of cuts; defaults to ``default_iterations``.
        center: Starting center, the origin by default.

    Raises:
        NoFeasiblePoint: If no center was approximately feasible.
    """
    b = np.asarray(objective, dtype=float)
    d = b.size
    if radius <= 0:
        raise ValueError("radius must be positive")
    K = default_iterations(d, radius) if iterations is None else iterations
    if K < 1:
        raise ValueError("need at least one iteration")
    y = np.zeros(d) if center is None else np.asarray(center, dtype=float).copy()
    P = np.eye(d) * radius**2
    log = CutLog()
    best, best_val, best_it = None, -np.inf, -1
    log_dets = [float(np.linalg.slogdet(P)[1])]

    for k in range(K):
        resp = oracle(y)
        if isinstance(resp, Violated):
            g = np.asarray(resp.row, dtype=float)
            log.entries.append(CutRecord("feasibility", k, resp.key, g.copy(), float(resp.rhs)))
        else:
            val = float(b @ y)
            if val > best_val:
                best, best_val, best_it = y.copy(), val, k
            g = -b
            log.entries.append(CutRecord("optimality", k))
        Pg = P @ g
        gPg = float(g @ Pg)
        if gPg <= _DEGENERATE:
            break
        Pg /= math.sqrt(gPg)
        if d == 1:
            y = y - 0.5 * Pg
            P = P / 4.0
        else:
            y = y - Pg / (d + 1)
            P = (d * d / (d * d - 1.0)) * (P - (2.0 / (d + 1)) * np.outer(Pg, Pg))
        if (k + 1) % 32 == 0:
            P = 0.5 * (P + P.T)
        log_dets.append(float(np.linalg.slogdet(P)[1]))

    if best is None:
        raise NoFeasiblePoint(f"no approximately feasible center in {K} iterations (radius {radius})")
    return EllipsoidResult(best, best_val, best_it, log, EllipsoidState(y, P, len(log.entries)), log_dets)


# ---------------------------------------------------------------------------
# primal recovery


@dataclass(frozen=True)
class PrimalColumn:
    vector: np.ndarray
    cost: float
    lower: float | None = 0.0
    name: str = ""


@dataclass
class PrimalTemplate:
    """The primal ``min c.x  s.t.  sum_col x_col * col.vector (rel) rhs``.

    ``fixed`` columns are always present; ``column(key)`` builds the column
    of an on-demand variable.
    """

    rhs: np.ndarray
    rel: tuple[str, ...]
    fixed: list[PrimalColumn]
    column: Callable[[Hashable], PrimalColumn]


@dataclass(frozen=True)
class ReducedPrimal:
    lp: LinearProgram
    keys: tuple[Hashable, ...]
    num_fixed: int


def recover_reduced_primal(template: PrimalTemplate, cut_log: CutLog | Sequence[Hashable]) -> ReducedPrimal:
    """The primal restricted to the fixed columns plus the logged (deduplicated) column keys."""
    if isinstance(cut_log, CutLog):
        keys = cut_log.feasibility_keys()
    else:
        keys = list(dict.fromkeys(cut_log))
    cols = list(template.fixed) + [template.column(key) for key in keys]
    rows = len(template.rhs)
    A = np.zeros((rows, len(cols)))
    for i, col in enumerate(cols):
        A[:, i] = col.vector
    c = np.array([col.cost for col in cols], dtype=float)
    lower = np.array([-np.inf if col.lower is None else col.lower for col in cols], dtype=float)
    lp = LinearProgram(
        "min",
        c,
        A,
        tuple(template.rel),
        np.asarray(template.rhs, dtype=float),
        lower,
        np.full(len(cols), np.inf),
        tuple(col.name or f"col{i}" for i, col in enumerate(cols)),
    )
    return ReducedPrimal(lp, tuple(keys), len(template.fixed))


def extend_with_zeros(solution: np.ndarray, reduced: ReducedPrimal, tol: float = 0.0) -> tuple[np.ndarray, dict]:
    """Split a reduced solution into fixed-variable values and a sparse map of nonzero columns.

    Every on-demand column absent from the map is zero.
    """
    x = np.asarray(solution, dtype=float)
    fixed = x[: reduced.num_fixed].copy()
    sparse = {key: float(v) for key, v in zip(reduced.keys, x[reduced.num_fixed :]) if abs(v) > tol}
    return fixed, sparse


# ---------------------------------------------------------------------------
# boosting randomized oracles


def repetitions(p: float, n: int, iterations: int) -> int:
    """Number of independent repeats so that one call fails with probability at most ``(1 - p) / (n I)``."""
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if n < 1 or iterations < 1:
        raise ValueError("n and the iteration bound must be positive")
    if p == 1.0:
        return 1
    exponent = math.log(n * iterations) / -math.log(1.0 - p)
    return 1 + max(0, math.ceil(exponent - 1e-12))


class RepeatedOracle:
    """Query a randomized oracle ``T`` times; any violated row is trusted."""

    def __init__(self, base: Oracle, n: int, iterations: int):
        base_contract = getattr(base, "contract", OracleContract())
        self.base = base
        self.repeats = repetitions(base_contract.p, n, iterations)
        fail = (1.0 - base_contract.p) ** self.repeats
        self.contract = OracleContract(base_contract.beta, 1.0 - fail)

    def __call__(self, y: np.ndarray) -> SeparationResponse:
        for _ in range(self.repeats):
            resp = self.base(y)
            if isinstance(resp, Violated):
                return resp
        return APPROX_FEASIBLE


def repeat_oracle(base: Oracle, n: int, iterations: int) -> RepeatedOracle:
    return RepeatedOracle(base, n, iterations)
