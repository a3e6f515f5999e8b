"""Multi-objective problems and the per-iteration single-objective programs.

At iteration ``t`` of the ordered-outcomes scheme the constants
``z_1 .. z_{t-1}`` are fixed and the program asks for a point whose ``t``
smallest objective values sum to as much as possible beyond ``z_1 + .. +
z_{t-1}``, while every shorter prefix of smallest values keeps up with the
matching prefix of constants.  Three equivalent forms are built here:

* the subset form, with one row per set of objectives (exponential; small n only),
* the compact form, stated directly on sorted values (used for checking points),
* the linear form with auxiliary variables ``y`` and ``m`` (what the LP solver sees).
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .linprog import LinearProgram, LpError
from .order import sort_outcomes

PREFIX_TOL = 1e-7


class KindError(ValueError):
    """Operation not available for this kind of problem."""


class InfeasiblePointError(ValueError):
    """A point violates the feasible region or a prefix-sum constraint."""

    def __init__(self, message: str, ell: int | None = None, lhs: float = np.nan, rhs: float = np.nan):
        super().__init__(message)
        self.ell = ell
        self.lhs = lhs
        self.rhs = rhs


@dataclass(frozen=True)
class MultiObjectiveProblem:
    """Either a polyhedron with linear objectives or an explicit finite set of utility vectors.

    Linear kind: points are vectors ``x`` satisfying ``region`` (its objective is
    ignored) and objective ``i`` is ``objectives[i] @ x``.  Finite kind: points
    are candidate indices and ``candidates[i]`` is the utility vector of
    candidate ``i``.
    """

    kind: str
    region: LinearProgram | None = None
    objectives: np.ndarray | None = None
    candidates: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind == "linear":
            if self.region is None or self.objectives is None:
                raise ValueError("linear problems need a region and objectives")
            if self.objectives.ndim != 2 or self.objectives.shape[0] < 1:
                raise ValueError("need at least one objective row")
            if self.objectives.shape[1] != self.region.num_vars:
                raise ValueError(
                    f"objective rows have {self.objectives.shape[1]} entries, "
                    f"region has {self.region.num_vars} variables"
                )
        elif self.kind == "finite":
            if self.candidates is None or self.candidates.ndim != 2 or self.candidates.shape[0] == 0:
                raise ValueError("finite problems need a non-empty candidate matrix")
            if self.candidates.shape[1] < 1:
                raise ValueError("need at least one objective")
        else:
            raise ValueError(f"unknown problem kind {self.kind!r}")

    @classmethod
    def linear(
        cls,
        constraints: Sequence[tuple[Sequence[float], str, float]],
        objectives: Sequence[Sequence[float]],
        bounds: Sequence[tuple[float | None, float | None]] | None = None,
    ) -> MultiObjectiveProblem:
        C = np.asarray(objectives, dtype=float)
        region = LinearProgram.build("max", np.zeros(C.shape[1]), constraints, bounds)
        return cls("linear", region=region, objectives=C)

    @classmethod
    def finite(cls, candidates: Sequence[Sequence[float]]) -> MultiObjectiveProblem:
        return cls("finite", candidates=np.asarray(candidates, dtype=float))

    @property
    def n(self) -> int:
        if self.kind == "linear":
            return self.objectives.shape[0]
        return self.candidates.shape[1]

    @property
    def dim(self) -> int:
        return self.region.num_vars if self.kind == "linear" else 1

    def utilities(self, x) -> np.ndarray:
        if self.kind == "linear":
            return self.objectives @ np.asarray(x, dtype=float)
        return self.candidates[int(x)].copy()

    def contains(self, x, tol: float = 1e-7) -> bool:
        if self.kind == "finite":
            return isinstance(x, (int, np.integer)) and 0 <= int(x) < self.candidates.shape[0]
        x = np.asarray(x, dtype=float)
        return x.shape == (self.dim,) and self.region.is_feasible(x, tol)


@dataclass(frozen=True)
class IterationLedger:
    """Constants fixed so far and the points that produced them.

    ``t`` is the iteration about to run, so ``len(z) == t - 1``; a ledger of a
    finished run over ``n`` objectives holds ``n`` constants.
    """

    z: tuple[float, ...] = ()
    witnesses: tuple = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if len(self.z) != len(self.witnesses):
            raise ValueError("one witness per constant")

    @property
    def t(self) -> int:
        return len(self.z) + 1

    def prefix(self, ell: int) -> float:
        """``z_1 + ... + z_ell`` (zero for ``ell = 0``)."""
        return float(sum(self.z[:ell]))

    def extended(self, x, z_t: float) -> IterationLedger:
        return IterationLedger(self.z + (float(z_t),), self.witnesses + (x,))


# ---------------------------------------------------------------------------
# compact form


def sorted_prefix_sums(u: np.ndarray) -> np.ndarray:
    return np.cumsum(sort_outcomes(u))


def _prefix_tol(value: float) -> float:
    return PREFIX_TOL * max(1.0, abs(value))


def first_prefix_violation(problem: MultiObjectiveProblem, ledger: IterationLedger, x) -> InfeasiblePointError | None:
    if not problem.contains(x):
        return InfeasiblePointError("point lies outside the feasible region")
    sums = sorted_prefix_sums(problem.utilities(x))
    for ell in range(1, ledger.t):
        rhs = ledger.prefix(ell)
        if sums[ell - 1] < rhs - _prefix_tol(rhs):
            return InfeasiblePointError(
                f"sum of the {ell} smallest values is {sums[ell - 1]:.10g} < {rhs:.10g}",
                ell,
                float(sums[ell - 1]),
                rhs,
            )
    return None


def check_p2compact_feasible(problem: MultiObjectiveProblem, ledger: IterationLedger, x) -> bool:
    return first_prefix_violation(problem, ledger, x) is None


def eval_p2compact_objective(problem: MultiObjectiveProblem, ledger: IterationLedger, x) -> float:
    """Largest ``z_t`` that ``x`` supports at iteration ``ledger.t``.

    Raises :class:`InfeasiblePointError` naming the first violated prefix.
    """
    err = first_prefix_violation(problem, ledger, x)
    if err is not None:
        raise err
    t = ledger.t
    if t > problem.n:
        raise ValueError(f"iteration {t} exceeds the number of objectives {problem.n}")
    return float(sorted_prefix_sums(problem.utilities(x))[t - 1] - ledger.prefix(t - 1))


# ---------------------------------------------------------------------------
# linear form with auxiliary variables


@dataclass(frozen=True)
class P3Layout:
    """Column positions inside the LP returned by :func:`build_p3`."""

    dim: int
    n: int
    t: int

    @property
    def z(self) -> int:
        return self.dim

    def y(self, ell: int) -> int:
        return self.dim + ell  # ell is 1-based

    def m(self, ell: int, j: int) -> int:
        return self.dim + 1 + self.t + (ell - 1) * self.n + j

    @property
    def size(self) -> int:
        return self.dim + 1 + self.t + self.t * self.n


@dataclass(frozen=True)
class P3Witness:
    """A point of the auxiliary-variable program: ``x``, ``z_t`` and ``y[ell-1]``, ``m[ell-1, j]``."""

    x: object
    z_t: float
    y: np.ndarray
    m: np.ndarray


def _require_linear(problem: MultiObjectiveProblem) -> None:
    if problem.kind != "linear":
        raise KindError("this program is only built for linear problems")


def _check_t(problem: MultiObjectiveProblem, ledger: IterationLedger) -> int:
    t = ledger.t
    if t > problem.n:
        raise ValueError(f"iteration {t} exceeds the number of objectives {problem.n}")
    return t


def build_p3(problem: MultiObjectiveProblem, ledger: IterationLedger) -> LinearProgram:
    """Polynomial-size LP for iteration ``ledger.t``; maximizes ``z_t``.

    Variables are laid out as described by :class:`P3Layout`.
    """
    _require_linear(problem)
    t = _check_t(problem, ledger)
    n, d = problem.n, problem.dim
    lay = P3Layout(d, n, t)
    N = lay.size
    region = problem.region
    rows: list[tuple[np.ndarray, str, float]] = []
    for a, r, rhs in zip(region.A, region.rel, region.b):
        row = np.zeros(N)
        row[:d] = a
        rows.append((row, r, rhs))
    for ell in range(1, t + 1):
        row = np.zeros(N)
        row[lay.y(ell)] = ell
        for j in range(n):
            row[lay.m(ell, j)] = -1.0
        if ell < t:
            rows.append((row, ">=", ledger.prefix(ell)))
        else:
            row[lay.z] = -1.0
            rows.append((row, ">=", ledger.prefix(t - 1)))
    for ell in range(1, t + 1):
        for j in range(n):
            # m[ell,j] >= y_ell - f_j(x)
            row = np.zeros(N)
            row[lay.m(ell, j)] = 1.0
            row[lay.y(ell)] = -1.0
            row[:d] += problem.objectives[j]
            rows.append((row, ">=", 0.0))
    c = np.zeros(N)
    c[lay.z] = 1.0
    bounds: list[tuple[float | None, float | None]] = []
    for lo, hi in zip(region.lower, region.upper):
        bounds.append((None if np.isinf(lo) else lo, None if np.isinf(hi) else hi))
    bounds.append((None, None))  # z_t
    bounds.extend([(None, None)] * t)  # y
    bounds.extend([(0.0, None)] * (t * n))  # m
    names = (
        [f"x{i + 1}" for i in range(d)]
        + ["z_t"]
        + [f"y{ell}" for ell in range(1, t + 1)]
        + [f"m{ell},{j + 1}" for ell in range(1, t + 1) for j in range(n)]
    )
    return LinearProgram.build("max", c, rows, bounds, names)


def p3_witness_from_vector(problem: MultiObjectiveProblem, ledger: IterationLedger, vec: np.ndarray) -> P3Witness:
    """Unpack a solution vector of :func:`build_p3`."""
    t = ledger.t
    lay = P3Layout(problem.dim, problem.n, t)
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (lay.size,):
        raise LpError(f"expected {lay.size} entries, got {vec.shape}")
    y = np.array([vec[lay.y(ell)] for ell in range(1, t + 1)])
    m = np.array([[vec[lay.m(ell, j)] for j in range(problem.n)] for ell in range(1, t + 1)])
    return P3Witness(vec[: problem.dim].copy(), float(vec[lay.z]), y, m)


def p3_violations(problem: MultiObjectiveProblem, ledger: IterationLedger, w: P3Witness, tol: float = PREFIX_TOL) -> list[str]:
    """Names of the auxiliary-variable constraints that ``w`` breaks."""
    t = ledger.t
    out = []
    if not problem.contains(w.x):
        out.append("x outside the feasible region")
    if w.y.shape != (t,) or w.m.shape != (t, problem.n):
        return out + ["wrong shape"]
    f = problem.utilities(w.x)
    for ell in range(1, t + 1):
        lhs = ell * w.y[ell - 1] - w.m[ell - 1].sum()
        rhs = ledger.prefix(ell) if ell < t else ledger.prefix(t - 1) + w.z_t
        if lhs < rhs - tol * max(1.0, abs(rhs)):
            out.append(f"prefix row {ell}")
        for j in range(problem.n):
            gap = w.y[ell - 1] - f[j]
            if w.m[ell - 1, j] < gap - tol * max(1.0, abs(gap)):
                out.append(f"m[{ell},{j + 1}] below y - f")
            if w.m[ell - 1, j] < -tol:
                out.append(f"m[{ell},{j + 1}] negative")
    return out


def p2_to_p3_witness(problem: MultiObjectiveProblem, ledger: IterationLedger, x, z_t: float) -> P3Witness:
    """Auxiliary values that make a compact-form solution feasible for the linear form.

    ``y_ell`` is the ell-th smallest objective value and ``m[ell, j]`` how far
    objective ``j`` falls below it, so ``ell*y_ell - sum_j m[ell, j]`` equals the
    sum of the ell smallest values.
    """
    t = _check_t(problem, ledger)
    value = eval_p2compact_objective(problem, ledger, x)
    if z_t > value + _prefix_tol(value):
        raise InfeasiblePointError(f"z_t = {z_t} exceeds the value {value} supported by x", t, value, z_t)
    f = problem.utilities(x)
    v = sort_outcomes(f)
    y = v[:t].copy()
    m = np.maximum(0.0, y[:, None] - f[None, :])
    return P3Witness(x, float(z_t), y, m)


def p3_to_p2_projection(problem: MultiObjectiveProblem, ledger: IterationLedger, w: P3Witness) -> tuple[object, float]:
    """Drop the auxiliary variables; the pair is feasible for the compact form."""
    bad = p3_violations(problem, ledger, w)
    if bad:
        raise InfeasiblePointError("not a feasible auxiliary-variable point: " + ", ".join(bad))
    return w.x, w.z_t


# ---------------------------------------------------------------------------
# subset form


def build_p2_explicit(problem: MultiObjectiveProblem, ledger: IterationLedger, subset_cap: int = 6) -> LinearProgram:
    """LP over ``(x, z_t)`` with one row per subset of at most ``t`` objectives."""
    _require_linear(problem)
    t = _check_t(problem, ledger)
    n, d = problem.n, problem.dim
    if n > subset_cap:
        raise ValueError(f"{n} objectives exceed the subset cap {subset_cap}")
    region = problem.region
    N = d + 1
    rows: list[tuple[np.ndarray, str, float]] = []
    for a, r, rhs in zip(region.A, region.rel, region.b):
        row = np.zeros(N)
        row[:d] = a
        rows.append((row, r, rhs))
    for size in range(1, t + 1):
        for subset in itertools.combinations(range(n), size):
            row = np.zeros(N)
            row[:d] = problem.objectives[list(subset)].sum(axis=0)
            if size < t:
                rows.append((row, ">=", ledger.prefix(size)))
            else:
                row[d] = -1.0
                rows.append((row, ">=", ledger.prefix(t - 1)))
    c = np.zeros(N)
    c[d] = 1.0
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in zip(region.lower, region.upper)]
    bounds.append((None, None))
    return LinearProgram.build("max", c, rows, bounds)


def p2_explicit_feasible(problem: MultiObjectiveProblem, ledger: IterationLedger, x, z_t: float, tol: float = PREFIX_TOL) -> bool:
    """Check ``(x, z_t)`` against every subset row directly."""
    if not problem.contains(x):
        return False
    f = problem.utilities(x)
    t = ledger.t
    for size in range(1, t + 1):
        rhs = ledger.prefix(size) if size < t else ledger.prefix(t - 1) + z_t
        for subset in itertools.combinations(range(problem.n), size):
            if f[list(subset)].sum() < rhs - tol * max(1.0, abs(rhs)):
                return False
    return True


# ---------------------------------------------------------------------------
# vertices of a small polyhedron (probe points)


def region_vertices(problem: MultiObjectiveProblem, limit: int = 5000, tol: float = 1e-9) -> list[np.ndarray]:
    """All vertices of the feasible region of a low-dimensional linear problem."""
    _require_linear(problem)
    region = problem.region
    d = region.num_vars
    planes: list[tuple[np.ndarray, float]] = [(a, b) for a, b in zip(region.A, region.b)]
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        if np.isfinite(region.lower[i]):
            planes.append((e, region.lower[i]))
        if np.isfinite(region.upper[i]):
            planes.append((e, region.upper[i]))
    out: list[np.ndarray] = []
    for combo in itertools.combinations(range(len(planes)), d):
        M = np.array([planes[k][0] for k in combo])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        v = np.linalg.solve(M, np.array([planes[k][1] for k in combo]))
        if region.is_feasible(v, 1e-9) and not any(np.allclose(v, w, atol=tol) for w in out):
            out.append(v)
            if len(out) >= limit:
                break
    return out
