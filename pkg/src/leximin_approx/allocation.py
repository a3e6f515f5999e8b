"""Leximin-approximate stochastic allocation of indivisible goods.

A stochastic allocation is a distribution over simple allocations (each
item to one agent); agent ``j`` values it by expected utility.  Each
iteration of the ordered-outcomes loop is a linear program over
exponentially many allocation probabilities.  It is solved through its dual
with the ellipsoid method, where separating a dual point amounts to a
weighted utilitarian welfare maximization, and then by the simplex method on
the allocations the ellipsoid discovered.

Normalization used for one iteration ``t`` with fixed constants
``z_1 .. z_{t-1}`` and prefix sums ``Z_l``: the primal variables are
``p'_A = p_A / z_t`` so that ``min sum_A p'_A`` equals ``1 / z_t``.  Its dual
has variables ``v[l, j] >= 0`` with ``q_l = sum_j v[l, j] / l`` and
``v[l, j] <= q_l``; the allocation rows read
``sum_{l, j} u_j(A) v[l, j] - sum_l Zs_l q_l <= 1`` where ``Zs_l = Z_l`` for
``l < t`` and ``Zs_t = Z_{t-1}``.
"""

from __future__ import annotations

import itertools
import math
import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .ellipsoid import (
    APPROX_FEASIBLE,
    CutLog,
    CutRecord,
    OracleContract,
    PrimalColumn,
    PrimalTemplate,
    SeparationResponse,
    Violated,
    default_iterations,
    ellipsoid_maximize,
    extend_with_zeros,
    recover_reduced_primal,
    repetitions,
)
from .linprog import solve
from .order import TOL, ApproxFactors, factor_transform, is_leximin_preferred
from .ordered_outcomes import LeximinResult, VerificationReport, exact_lp_op, run_ordered_outcomes
from .programs import IterationLedger, MultiObjectiveProblem

# structural dual rows are only reported when broken by more than this
_STRUCT_TOL = 1e-12


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class SimpleAllocation:
    """``owner[g]`` is the agent receiving item ``g``."""

    owner: tuple[int, ...]

    def bundle(self, agent: int) -> tuple[int, ...]:
        return tuple(g for g, a in enumerate(self.owner) if a == agent)

    def validate(self, n: int) -> None:
        if any(not (0 <= a < n) for a in self.owner):
            raise ValueError(f"owner entries must lie in [0, {n}): {self.owner}")


class ValueOracle:
    """Set function ``bundle -> utility`` with memoization and call counting.

    ``calls`` counts evaluations of the underlying function; ``queries``
    counts every request including cache hits.
    """

    def __init__(self, evaluate: Callable[[tuple[int, ...]], float], kind: str, data: object, submodular: bool = True):
        self._evaluate = evaluate
        self.kind = kind
        self.data = data
        self.submodular = submodular
        self._cache: dict[tuple[int, ...], float] = {}
        self._lock = threading.Lock()
        self.calls = 0
        self.queries = 0

    @classmethod
    def additive(cls, values: Sequence[float]) -> ValueOracle:
        vals = tuple(float(v) for v in values)
        if any(v < 0 for v in vals):
            raise ValueError("additive values must be non-negative")
        return cls(lambda bundle: float(sum(vals[g] for g in bundle)), "additive", vals)

    @classmethod
    def coverage(cls, sets: Sequence[Sequence[int]]) -> ValueOracle:
        """Utility of a bundle is the number of distinct elements its items cover."""
        covers = tuple(frozenset(s) for s in sets)
        return cls(lambda bundle: float(len(frozenset().union(*(covers[g] for g in bundle)))), "coverage", covers)

    def __call__(self, bundle: Sequence[int]) -> float:
        key = tuple(sorted(set(bundle)))
        with self._lock:
            self.queries += 1
            if key in self._cache:
                return self._cache[key]
        value = self._evaluate(key)
        with self._lock:
            if key not in self._cache:
                self.calls += 1
                self._cache[key] = value
        return value


@dataclass
class AllocationInstance:
    n: int
    m: int
    oracles: list[ValueOracle]

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 agents and m >= 0 items")
        if len(self.oracles) != self.n:
            raise ValueError(f"expected {self.n} utility oracles, got {len(self.oracles)}")
        everything = tuple(range(self.m))
        for j, u in enumerate(self.oracles):
            if u(everything) <= 0:
                raise ValueError(f"agent {j} must value the full item set positively")

    def utility(self, agent: int, alloc: SimpleAllocation) -> float:
        return self.oracles[agent](alloc.bundle(agent))

    def utilities(self, alloc: SimpleAllocation) -> np.ndarray:
        return np.array([self.utility(j, alloc) for j in range(self.n)])

    def all_allocations(self) -> list[SimpleAllocation]:
        return [SimpleAllocation(o) for o in itertools.product(range(self.n), repeat=self.m)]


@dataclass(frozen=True)
class StochasticAllocation:
    support: tuple[tuple[SimpleAllocation, float], ...]

    def __post_init__(self) -> None:
        probs = [p for _, p in self.support]
        if any(p < -1e-12 for p in probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")

    @classmethod
    def point_mass(cls, alloc: SimpleAllocation) -> StochasticAllocation:
        return cls(((alloc, 1.0),))


def expected_utility(dist: StochasticAllocation, oracle: ValueOracle, agent: int) -> float:
    return float(sum(p * oracle(a.bundle(agent)) for a, p in dist.support))


def expected_utilities(dist: StochasticAllocation, instance: AllocationInstance) -> np.ndarray:
    return np.array([expected_utility(dist, instance.oracles[j], j) for j in range(instance.n)])


# ---------------------------------------------------------------------------
# weighted utilitarian welfare


def weighted_welfare(instance: AllocationInstance, weights: np.ndarray, alloc: SimpleAllocation) -> float:
    return float(sum(weights[j] * instance.utility(j, alloc) for j in range(instance.n) if weights[j] != 0.0))


class GreedyUtilitarian:
    """Give items one at a time to the (agent, item) pair of largest weighted marginal gain.

    Ties go to the lowest agent, then the lowest item.  For monotone
    submodular utilities this reaches at least half the optimum.
    """

    alpha = 0.5
    p = 1.0

    def __call__(self, instance: AllocationInstance, weights: np.ndarray) -> tuple[SimpleAllocation, float]:
        w = np.asarray(weights, dtype=float)
        owner = [-1] * instance.m
        bundles: list[list[int]] = [[] for _ in range(instance.n)]
        current = [instance.oracles[j](()) for j in range(instance.n)]
        remaining = list(range(instance.m))
        while remaining:
            best_gain, best_j, best_g = -np.inf, -1, -1
            for j in range(instance.n):
                for g in remaining:
                    gain = w[j] * (instance.oracles[j](bundles[j] + [g]) - current[j])
                    if gain > best_gain:
                        best_gain, best_j, best_g = gain, j, g
            bundles[best_j].append(best_g)
            current[best_j] = instance.oracles[best_j](bundles[best_j])
            owner[best_g] = best_j
            remaining.remove(best_g)
        alloc = SimpleAllocation(tuple(owner))
        return alloc, weighted_welfare(instance, w, alloc)


class BruteForceUtilitarian:
    """Exact maximizer over all ``n ** m`` allocations (first maximizer in enumeration order)."""

    alpha = 1.0
    p = 1.0

    def __init__(self, cap: int = 4096):
        self.cap = cap
        self._tables: dict[int, tuple[list[SimpleAllocation], np.ndarray]] = {}

    def table(self, instance: AllocationInstance) -> tuple[list[SimpleAllocation], np.ndarray]:
        key = id(instance)
        if key not in self._tables:
            if instance.n**instance.m > self.cap:
                raise ValueError(f"{instance.n}^{instance.m} allocations exceed the cap {self.cap}")
            allocs = instance.all_allocations()
            U = np.array([instance.utilities(a) for a in allocs])
            self._tables[key] = (allocs, U)
        return self._tables[key]

    def __call__(self, instance: AllocationInstance, weights: np.ndarray) -> tuple[SimpleAllocation, float]:
        allocs, U = self.table(instance)
        welfare = U @ np.asarray(weights, dtype=float)
        i = int(np.argmax(welfare))
        return allocs[i], float(welfare[i])


class RandomizedUtilitarian:
    """Run ``inner`` with probability ``p``; otherwise return a uniformly random allocation."""

    def __init__(self, inner, p: float, seed: int | None = None):
        if not (0.0 < p <= 1.0):
            raise ValueError(f"p must lie in (0, 1], got {p}")
        self.inner = inner
        self.alpha = inner.alpha
        self.p = p * inner.p
        self._p_here = p
        self.rng = np.random.default_rng(seed)

    def __call__(self, instance: AllocationInstance, weights: np.ndarray) -> tuple[SimpleAllocation, float]:
        if self.rng.random() < self._p_here:
            return self.inner(instance, weights)
        alloc = SimpleAllocation(tuple(int(a) for a in self.rng.integers(0, instance.n, instance.m)))
        return alloc, weighted_welfare(instance, np.asarray(weights, dtype=float), alloc)


def greedy_utilitarian(instance: AllocationInstance, weights: Sequence[float]) -> tuple[SimpleAllocation, float]:
    return GreedyUtilitarian()(instance, np.asarray(weights, dtype=float))


def brute_force_utilitarian(instance: AllocationInstance, weights: Sequence[float]) -> tuple[SimpleAllocation, float]:
    return BruteForceUtilitarian()(instance, np.asarray(weights, dtype=float))


# ---------------------------------------------------------------------------
# the dual of one iteration


def prefix_constants(z: Sequence[float], t: int) -> np.ndarray:
    """``Zs_l`` for ``l = 1 .. t``: prefix sums of ``z``, with the last one repeated for ``l = t``."""
    sums = np.cumsum(np.asarray(z[: t - 1], dtype=float)) if t > 1 else np.zeros(0)
    last = sums[-1] if t > 1 else 0.0
    return np.append(sums, last)


@dataclass(frozen=True)
class DualPoint:
    """Dual values ``v[l, j]`` for ``l = 1 .. t``; ``q`` is implied."""

    v: np.ndarray

    @property
    def t(self) -> int:
        return self.v.shape[0]

    @property
    def q(self) -> np.ndarray:
        return self.v.sum(axis=1) / np.arange(1, self.t + 1)

    def structural_violations(self, tol: float = 1e-9) -> list[tuple[int, int]]:
        """Entries (0-based ``l, j``) that are negative or exceed their ``q_l``."""
        q = self.q
        bad = []
        for ell in range(self.t):
            for j in range(self.v.shape[1]):
                if self.v[ell, j] < -tol or self.v[ell, j] > q[ell] + tol:
                    bad.append((ell, j))
        return bad


def allocation_row(instance: AllocationInstance, alloc: SimpleAllocation, z: Sequence[float], t: int) -> np.ndarray:
    """Coefficients over flattened ``v`` of the dual row of ``alloc`` (right-hand side 1)."""
    u = instance.utilities(alloc)
    zs = prefix_constants(z, t)
    ells = np.arange(1, t + 1)
    return (u[None, :] - (zs / ells)[:, None]).ravel()


def separation_oracle_d3(
    point: DualPoint,
    z: Sequence[float],
    utilitarian,
    instance: AllocationInstance,
    repeats: int = 1,
    check_last_row: bool = True,
) -> SeparationResponse:
    """Find a dual row broken by ``point``, or declare it approximately feasible.

    Structural rows (``v >= 0`` and ``v[l, j] <= q_l``) are checked directly.
    Then the utilitarian maximizer is run ``repeats`` times with weights
    ``w_j = sum_l v[l, j]``; an allocation whose weighted welfare exceeds
    ``1 + sum_l Zs_l q_l`` gives a violated allocation row, recomputed from
    exact utilities before it is returned.
    """
    v = np.asarray(point.v, dtype=float)
    t, n = v.shape
    q = point.q
    for ell in range(t):
        for j in range(n):
            if v[ell, j] < -_STRUCT_TOL:
                row = np.zeros((t, n))
                row[ell, j] = -1.0
                return Violated(row.ravel(), 0.0)
    last = t if check_last_row else min(t, n - 1)
    for ell in range(last):
        for j in range(n):
            if v[ell, j] - q[ell] > _STRUCT_TOL:
                row = np.zeros((t, n))
                row[ell, :] = -1.0 / (ell + 1)
                row[ell, j] += 1.0
                return Violated(row.ravel(), 0.0)
    weights = v.sum(axis=0)
    threshold = 1.0 + float(prefix_constants(z, t) @ q)
    for _ in range(repeats):
        alloc, _ = utilitarian(instance, weights)
        row = allocation_row(instance, alloc, z, t)
        if float(row @ v.ravel()) > 1.0:
            return Violated(row, 1.0, key=alloc.owner)
    return APPROX_FEASIBLE


@dataclass
class DualParametrization:
    """Full-dimensional coordinates for the dual of iteration ``t``.

    When ``t = n`` the last row must have all ``v[t, j]`` equal, so it is
    described by one coordinate.  ``basis`` maps coordinates to flattened
    ``v``.
    """

    n: int
    t: int
    basis: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        full_rows = min(self.t, self.n - 1)
        dim = self.n * full_rows + (1 if self.t == self.n else 0)
        B = np.zeros((self.t * self.n, dim))
        B[: self.n * full_rows, : self.n * full_rows] = np.eye(self.n * full_rows)
        if self.t == self.n:
            B[self.n * full_rows :, -1] = 1.0
        self.basis = B

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def point(self, theta: np.ndarray) -> DualPoint:
        return DualPoint((self.basis @ theta).reshape(self.t, self.n))

    def objective(self) -> np.ndarray:
        """Coefficients of ``q_t`` in coordinates."""
        c = np.zeros((self.t, self.n))
        c[self.t - 1, :] = 1.0 / self.t
        return self.basis.T @ c.ravel()


# ---------------------------------------------------------------------------
# one iteration: ellipsoid on the dual, simplex on the discovered columns


@dataclass(frozen=True)
class EllipsoidConfig:
    radius: float | None = None
    iterations: int | None = None
    enlargements: int = 3
    gap_tol: float = 1e-7


@dataclass
class C2Solution:
    p_prime: dict[tuple[int, ...], float]
    y_prime: np.ndarray
    m_prime: np.ndarray
    t: int
    z_prefix: tuple[float, ...]
    cut_log: CutLog
    dual_value: float
    radius: float

    @property
    def total(self) -> float:
        return float(sum(self.p_prime.values()))

    @property
    def z_t(self) -> float:
        return 1.0 / self.total

    @property
    def z_prime(self) -> np.ndarray:
        """Scaled constants ``z_i * sum p'`` for earlier iterations, then 1 for ``t``."""
        return np.append(np.asarray(self.z_prefix, dtype=float) * self.total, 1.0)


def c2_template(instance: AllocationInstance, z: Sequence[float], t: int) -> PrimalTemplate:
    """Primal rows: one per ``q_l`` then one per ``v[l, j]``; fixed columns ``y'_l`` and ``m'[l, j]``."""
    n = instance.n
    zs = prefix_constants(z, t)
    rows = t + t * n
    rhs = np.zeros(rows)
    rhs[t - 1] = 1.0
    fixed = []
    for ell in range(t):
        vec = np.zeros(rows)
        vec[ell] = ell + 1
        vec[t + ell * n : t + (ell + 1) * n] = -1.0
        fixed.append(PrimalColumn(vec, 0.0, None, f"y{ell + 1}"))
    for ell in range(t):
        for j in range(n):
            vec = np.zeros(rows)
            vec[ell] = -1.0
            vec[t + ell * n + j] = 1.0
            fixed.append(PrimalColumn(vec, 0.0, 0.0, f"m{ell + 1},{j}"))

    def column(owner: tuple[int, ...]) -> PrimalColumn:
        alloc = SimpleAllocation(owner)
        vec = np.zeros(rows)
        vec[:t] = -zs
        vec[t:] = np.tile(instance.utilities(alloc), t)
        return PrimalColumn(vec, 1.0, 0.0, "p" + ",".join(map(str, owner)))

    return PrimalTemplate(rhs, (">=",) * rows, fixed, column)


def default_radius(instance: AllocationInstance, t: int) -> float:
    everything = tuple(range(instance.m))
    return 2.0 * math.sqrt(t * instance.n) * max(1.0 / u(everything) for u in instance.oracles)


def solve_c2(
    instance: AllocationInstance,
    z: Sequence[float],
    t: int,
    utilitarian,
    config: EllipsoidConfig = EllipsoidConfig(),
    seed_columns: Sequence[tuple[int, ...]] = (),
) -> C2Solution:
    """Approximately solve iteration ``t`` in the scaled form ``min sum p'``.

    ``seed_columns`` are allocations included in the restricted primal from
    the start so that it is feasible; they are recorded as seeds in the cut
    log.  If the restricted primal value exceeds the dual value reached by
    the ellipsoid, the starting ball was too small, so the radius is
    enlarged tenfold and the run repeated (keeping the columns found).

    Raises:
        NoFeasiblePoint: From the ellipsoid if no center was approximately feasible.
    """
    if t < 1 or t > instance.n:
        raise ValueError(f"iteration {t} out of range for {instance.n} agents")
    param = DualParametrization(instance.n, t)
    radius = default_radius(instance, t) if config.radius is None else config.radius
    template = c2_template(instance, z, t)
    objective = param.objective()
    columns = list(dict.fromkeys(tuple(c) for c in seed_columns))

    for attempt in range(config.enlargements + 1):
        K = default_iterations(param.dim, radius) if config.iterations is None else config.iterations
        repeats = repetitions(utilitarian.p, instance.n, K)

        def oracle(theta: np.ndarray) -> SeparationResponse:
            resp = separation_oracle_d3(param.point(theta), z, utilitarian, instance, repeats, check_last_row=t < instance.n)
            if isinstance(resp, Violated):
                return Violated(param.basis.T @ resp.row, resp.rhs, resp.key)
            return resp

        oracle.contract = OracleContract(1.0 / utilitarian.alpha - 1.0, utilitarian.p)
        result = ellipsoid_maximize(objective, oracle, radius, K)
        result.cut_log.seeds = [CutRecord("seed", -1, key) for key in columns]
        reduced = recover_reduced_primal(template, result.cut_log)
        sol = solve(reduced.lp)
        if not sol.optimal:
            raise RuntimeError(f"restricted primal of iteration {t} is {sol.status}")
        fixed, sparse = extend_with_zeros(sol.x, reduced)
        columns = list(reduced.keys)
        gap_ok = sol.objective_value <= result.best_value * (1.0 + config.gap_tol) + config.gap_tol
        if gap_ok or attempt == config.enlargements:
            break
        radius *= 10.0

    return C2Solution(
        p_prime={k: v for k, v in sparse.items() if v > 0.0},
        y_prime=fixed[:t],
        m_prime=fixed[t:].reshape(t, instance.n),
        t=t,
        z_prefix=tuple(float(v) for v in z[: t - 1]),
        cut_log=result.cut_log,
        dual_value=result.best_value,
        radius=radius,
    )


def c2_to_c1(solution: C2Solution) -> tuple[StochasticAllocation, dict[str, np.ndarray], float]:
    """Undo the scaling: ``z_t = 1 / sum p'`` and every variable is multiplied by ``z_t``."""
    total = solution.total
    if total <= 0.0:
        raise ValueError("the scaled solution has no probability mass")
    z_t = 1.0 / total
    support = tuple((SimpleAllocation(k), v * z_t) for k, v in solution.p_prime.items())
    # absorb rounding so the probabilities sum to exactly one
    s = sum(p for _, p in support)
    support = tuple((a, p / s) for a, p in support)
    aux = {"y": solution.y_prime * z_t, "m": solution.m_prime * z_t}
    return StochasticAllocation(support), aux, z_t


def c1_to_c2(
    dist: StochasticAllocation, aux: dict[str, np.ndarray], z_t: float, t: int, z_prefix: Sequence[float]
) -> C2Solution:
    """Inverse of ``c2_to_c1``: divide every variable by ``z_t``."""
    return C2Solution(
        p_prime={a.owner: p / z_t for a, p in dist.support},
        y_prime=np.asarray(aux["y"]) / z_t,
        m_prime=np.asarray(aux["m"]) / z_t,
        t=t,
        z_prefix=tuple(z_prefix),
        cut_log=CutLog(),
        dual_value=float("nan"),
        radius=float("nan"),
    )


# ---------------------------------------------------------------------------
# end to end


def _sorted_prefix_value(u: np.ndarray, z: Sequence[float], t: int) -> float:
    return float(np.sort(u)[:t].sum() - sum(z[: t - 1]))


def solve_stochastic_leximin(
    instance: AllocationInstance,
    utilitarian=None,
    config: EllipsoidConfig = EllipsoidConfig(),
    cut_logs: list[CutLog] | None = None,
) -> LeximinResult:
    """Leximin-approximate stochastic allocation.

    With an ``alpha``-approximate utilitarian maximizer the claimed factor is
    ``alpha^2 / (1 - alpha + alpha^2)``; for a randomized maximizer the
    separation oracle is boosted so that the whole run succeeds with
    probability at least ``p``.  If ``cut_logs`` is given, the cut log of
    every iteration is appended to it.
    """
    utilitarian = GreedyUtilitarian() if utilitarian is None else utilitarian
    n = instance.n
    z: list[float] = []
    witnesses = []
    seeds = [tuple([j] * instance.m) for j in range(n)]
    dist = None
    for t in range(1, n + 1):
        sol = solve_c2(instance, z, t, utilitarian, config, seeds)
        if cut_logs is not None:
            cut_logs.append(sol.cut_log)
        dist, _, z_lp = c2_to_c1(sol)
        achieved = _sorted_prefix_value(expected_utilities(dist, instance), z, t)
        z.append(min(z_lp, achieved))
        witnesses.append(dist)
        seeds = [a.owner for a, _ in dist.support]
    return LeximinResult(
        solution=dist,
        utilities=expected_utilities(dist, instance),
        ledger=IterationLedger(tuple(z), tuple(witnesses)),
        claimed_factors=factor_transform(ApproxFactors(utilitarian.alpha, 0.0)),
        claimed_probability=utilitarian.p,
    )


def brute_force_stochastic_leximin(instance: AllocationInstance, cap: int = 4096) -> LeximinResult:
    """Exact leximin over all ``n ** m`` allocation probabilities, one simplex LP per iteration."""
    count = instance.n**instance.m
    if count > cap:
        raise ValueError(f"{instance.n}^{instance.m} = {count} allocations exceed the cap {cap}")
    allocs = instance.all_allocations()
    U = np.array([instance.utilities(a) for a in allocs])
    problem = MultiObjectiveProblem.linear([(np.ones(count), "==", 1.0)], U.T)
    result = run_ordered_outcomes(problem, exact_lp_op)
    p = np.clip(result.solution, 0.0, None)
    p /= p.sum()
    support = tuple((a, float(pa)) for a, pa in zip(allocs, p) if pa > 1e-12)
    s = sum(pa for _, pa in support)
    dist = StochasticAllocation(tuple((a, pa / s) for a, pa in support))
    return LeximinResult(
        solution=dist,
        utilities=expected_utilities(dist, instance),
        ledger=result.ledger,
        claimed_factors=result.claimed_factors,
        claimed_probability=1.0,
    )


def verify_allocation(
    result: LeximinResult,
    instance: AllocationInstance,
    probes: Sequence[StochasticAllocation] | None = None,
    factors: ApproxFactors | None = None,
    tol: float = TOL,
) -> VerificationReport:
    """No probe distribution may be preferred over the result at the given factors.

    Probes default to every point-mass allocation.
    """
    factors = result.claimed_factors if factors is None else factors
    if probes is None:
        probes = [StochasticAllocation.point_mass(a) for a in instance.all_allocations()]
    report = VerificationReport(factors)
    for i, d in enumerate(probes):
        w = is_leximin_preferred(expected_utilities(d, instance), result.utilities, factors, tol)
        if w is not None:
            report.violations.append((i, w))
    return report


def random_distribution(instance: AllocationInstance, rng: np.random.Generator, support: int = 3) -> StochasticAllocation:
    """A random distribution over a few random allocations."""
    allocs = [SimpleAllocation(tuple(int(a) for a in rng.integers(0, instance.n, instance.m))) for _ in range(support)]
    p = rng.dirichlet(np.ones(support))
    return StochasticAllocation(tuple(zip(allocs, (float(x) for x in p / p.sum()))))
