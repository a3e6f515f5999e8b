"""Dense linear programs and a two-phase tableau simplex solver.

The solver uses Dantzig pricing and falls back to Bland's rule once it has
made too many pivots without improving the objective.  Passing
``exact=True`` runs the very same tableau code over :class:`fractions.Fraction`
entries, which gives a ground-truth mode for small instances.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11

RELATIONS = ("<=", "=", ">=")


class LpError(Exception):
    """Malformed linear program."""


class CyclingError(LpError):
    """The pivot budget was exhausted even under Bland's rule."""


@dataclass(frozen=True)
class LinearProgram:
    """``direction`` c.x subject to ``A[i] . x  rel[i]  b[i]`` and ``lower <= x <= upper``."""

    direction: str
    c: np.ndarray
    A: np.ndarray
    rel: tuple[str, ...]
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.direction not in ("min", "max"):
            raise LpError(f"direction must be 'min' or 'max', got {self.direction!r}")
        n = self.c.shape[0]
        if self.A.shape != (len(self.rel), n) or self.b.shape != (len(self.rel),):
            raise LpError(
                f"dimension mismatch: A{self.A.shape}, {len(self.rel)} relations, "
                f"b{self.b.shape}, {n} variables"
            )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise LpError("bounds must have one entry per variable")
        if any(r not in RELATIONS for r in self.rel):
            raise LpError(f"unknown relation in {self.rel}")
        if np.any(self.lower > self.upper):
            raise LpError("some lower bound exceeds its upper bound")
        if self.names and len(self.names) != n:
            raise LpError("one name per variable")

    @classmethod
    def build(
        cls,
        direction: str,
        objective: Sequence[float],
        constraints: Sequence[tuple[Sequence[float], str, float]] = (),
        bounds: Sequence[tuple[float | None, float | None]] | None = None,
        names: Sequence[str] = (),
    ) -> LinearProgram:
        """Convenience constructor from plain lists; ``None`` bounds mean unbounded."""
        c = np.asarray(objective, dtype=float)
        n = c.shape[0]
        rows = [np.asarray(a, dtype=float) for a, _, _ in constraints]
        for r in rows:
            if r.shape != (n,):
                raise LpError(f"constraint row of length {r.shape[0]} for {n} variables")
        A = np.vstack(rows) if rows else np.zeros((0, n))
        rel = tuple(_canonical_rel(r) for _, r, _ in constraints)
        b = np.asarray([float(v) for _, _, v in constraints], dtype=float)
        if bounds is None:
            lower, upper = np.zeros(n), np.full(n, np.inf)
        else:
            if len(bounds) != n:
                raise LpError("one bound pair per variable")
            lower = np.array([-np.inf if lo is None else float(lo) for lo, _ in bounds])
            upper = np.array([np.inf if hi is None else float(hi) for _, hi in bounds])
        return cls(direction, c, A, rel, b, lower, upper, tuple(names))

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_rows(self) -> int:
        return len(self.rel)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Signed violation of every row and bound (positive means violated)."""
        x = np.asarray(x, dtype=float)
        ax = self.A @ x if self.num_rows else np.zeros(0)
        viol = []
        for v, r, rhs in zip(ax, self.rel, self.b):
            if r == "<=":
                viol.append(v - rhs)
            elif r == ">=":
                viol.append(rhs - v)
            else:
                viol.append(abs(v - rhs))
        viol.extend(self.lower - x)
        viol.extend(x - self.upper)
        return np.asarray([v for v in viol if not math.isnan(v)], dtype=float)

    def is_feasible(self, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
        res = self.residuals(x)
        return bool(res.size == 0 or res.max() <= tol * max(1.0, float(np.max(np.abs(x), initial=0.0))))


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = math.nan
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _canonical_rel(r: str) -> str:
    r = r.strip()
    aliases = {"<=": "<=", "=<": "<=", ">=": ">=", "=>": ">=", "=": "=", "==": "="}
    if r not in aliases:
        raise LpError(f"unknown relation {r!r}")
    return aliases[r]


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True)
class _Standard:
    """min c.s  s.t.  A s (rel) b,  s >= 0, plus the map back to original variables."""

    c: list
    A: list
    rel: list
    b: list
    # original variable i equals sum(sign * s[idx] for idx, sign in columns[i])
    columns: list


def _to_standard(lp: LinearProgram, exact: bool) -> _Standard:
    conv = _to_fraction if exact else float
    sign = -1 if lp.direction == "max" else 1
    cols: list[list[tuple[int, int]]] = []
    extra_rows: list[tuple[int, str, float]] = []  # (original var, rel, rhs)
    ns = 0
    for i in range(lp.num_vars):
        lo, hi = lp.lower[i], lp.upper[i]
        if lo >= 0 and math.isfinite(lo):
            cols.append([(ns, 1)])
            ns += 1
            if lo > 0:
                extra_rows.append((i, ">=", lo))
        else:
            cols.append([(ns, 1), (ns + 1, -1)])
            ns += 2
            if math.isfinite(lo):
                extra_rows.append((i, ">=", lo))
        if math.isfinite(hi):
            extra_rows.append((i, "<=", hi))

    zero = Fraction(0) if exact else 0.0
    c = [zero] * ns
    for i, parts in enumerate(cols):
        for idx, s in parts:
            c[idx] = conv(sign * s * lp.c[i])
    A, rel, b = [], [], []
    for row, r, rhs in zip(lp.A, lp.rel, lp.b):
        out = [zero] * ns
        for i, parts in enumerate(cols):
            if row[i] != 0:
                for idx, s in parts:
                    out[idx] = conv(s * row[i])
        A.append(out)
        rel.append(r)
        b.append(conv(rhs))
    for i, r, rhs in extra_rows:
        out = [zero] * ns
        for idx, s in cols[i]:
            out[idx] = conv(s)
        A.append(out)
        rel.append(r)
        b.append(conv(rhs))
    return _Standard(c, A, rel, b, cols)


def _to_fraction(v: float) -> Fraction:
    if isinstance(v, Fraction):
        return v
    f = Fraction(float(v))
    # small-denominator data (halves, tenths, ...) round-trips to its intended value
    g = f.limit_denominator(10**6)
    return g if float(g) == float(v) else f


# ---------------------------------------------------------------------------
# tableau simplex


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], exact: bool, ncols_real: int):
        self.T = T
        self.basis = basis
        self.exact = exact
        self.ncols_real = ncols_real
        self.pivots = 0

    def pivot(self, r: int, col: int) -> None:
        T = self.T
        T[r] = T[r] / T[r, col]
        colvals = T[:, col].copy()
        colvals[r] = 0
        T -= np.outer(colvals, T[r])
        if not self.exact:
            T[np.abs(T) < 1e-14] = 0.0
        self.basis[r] = col
        self.pivots += 1

    def run(self, allowed: np.ndarray, opt_tol, piv_tol, budget: int) -> str:
        """Minimize the objective in the last row; returns "optimal" or "unbounded"."""
        T = self.T
        m = T.shape[0] - 1
        stall_limit = 3 * (m + T.shape[1])
        stall = 0
        bland = False
        last_obj = T[-1, -1]
        while True:
            red = T[-1, :-1]
            cand = np.flatnonzero(allowed & (red < -opt_tol))
            if cand.size == 0:
                return "optimal"
            if bland:
                col = int(cand[0])
            else:
                col = int(cand[np.argmin(red[cand])])
            colv = T[:m, col]
            rows = np.flatnonzero(colv > piv_tol)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / colv[rows]
            best = min(ratios)
            if self.exact:
                ties = rows[ratios == best]
            else:
                ties = rows[ratios <= best + 1e-12 * (1 + abs(best))]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(max(ties, key=lambda i: (abs(colv[i]), -self.basis[i])))
            self.pivot(r, col)
            if self.pivots > budget:
                raise CyclingError(f"no convergence after {self.pivots} pivots")
            obj = T[-1, -1]
            # the tableau stores -objective in its corner, so progress means a decrease of -obj
            if obj > last_obj + (0 if self.exact else 1e-13 * (1 + abs(last_obj))):
                stall = 0
                last_obj = obj
            else:
                stall += 1
                if stall > stall_limit:
                    bland = True


def solve(lp: LinearProgram, exact: bool = False) -> LpSolution:
    """Solve ``lp`` with the two-phase simplex method.

    Returns a vertex solution when one exists; otherwise the status is
    ``"infeasible"`` or ``"unbounded"``.
    """
    st = _to_standard(lp, exact)
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    dtype = object if exact else float
    opt_tol = 0 if exact else OPT_TOL
    piv_tol = 0 if exact else PIVOT_TOL

    ns = len(st.c)
    rows = []
    for a, r, rhs in zip(st.A, st.rel, st.b):
        if rhs < 0:
            a = [-v for v in a]
            rhs = -rhs
            r = {"<=": ">=", ">=": "<=", "=": "="}[r]
        rows.append((a, r, rhs))
    m = len(rows)
    n_slack = sum(1 for _, r, _ in rows if r != "=")
    n_art = sum(1 for _, r, _ in rows if r != "<=")
    N = ns + n_slack + n_art
    T = np.empty((m + 1, N + 1), dtype=dtype)
    T[:] = zero
    basis = []
    si, ai = ns, ns + n_slack
    art_cols = []
    for i, (a, r, rhs) in enumerate(rows):
        T[i, :ns] = a
        T[i, -1] = rhs
        if r == "<=":
            T[i, si] = one
            basis.append(si)
            si += 1
        else:
            if r == ">=":
                T[i, si] = -one
                si += 1
            T[i, ai] = one
            basis.append(ai)
            art_cols.append(ai)
            ai += 1

    budget = 50 * (m + N) + 1000
    total_pivots = 0
    is_art = np.zeros(N, dtype=bool)
    is_art[art_cols] = True

    if art_cols:
        # phase I: minimize the sum of artificials, expressed in non-basic terms
        T[-1, :] = zero
        for i, bcol in enumerate(basis):
            if is_art[bcol]:
                T[-1, :] -= T[i, :]
        for col in art_cols:
            T[-1, col] = zero
        tab = _Tableau(T, basis, exact, N)
        tab.run(np.ones(N, dtype=bool), opt_tol, piv_tol, budget)
        total_pivots += tab.pivots
        infeas = -T[-1, -1]
        scale = max([1.0] + [abs(float(v)) for v in T[:m, -1]])
        if (infeas > 0) if exact else (infeas > FEAS_TOL * scale):
            return LpSolution("infeasible", pivots=total_pivots)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if is_art[basis[i]]:
                rowv = T[i, :N]
                cands = [j for j in range(N) if not is_art[j] and (rowv[j] != 0 if exact else abs(rowv[j]) > 1e-9)]
                if cands:
                    j = max(cands, key=lambda j: abs(rowv[j]))
                    tab.pivot(i, j)
                    keep.append(i)
            else:
                keep.append(i)
        keep_rows = keep + [m]
        T = T[keep_rows]
        basis = [basis[i] for i in keep]
        m = len(keep)

    # phase II objective row
    cost = np.empty(N, dtype=dtype)
    cost[:] = zero
    cost[:ns] = st.c
    T[-1, :] = zero
    T[-1, :N] = cost
    for i, bcol in enumerate(basis):
        if cost[bcol] != 0:
            T[-1, :] -= cost[bcol] * T[i, :]
    allowed = ~is_art
    tab = _Tableau(T, basis, exact, N)
    status = tab.run(allowed, opt_tol, piv_tol, budget)
    total_pivots += tab.pivots
    if status == "unbounded":
        return LpSolution("unbounded", pivots=total_pivots)

    s = np.empty(N, dtype=dtype)
    s[:] = zero
    for i, bcol in enumerate(basis):
        s[bcol] = T[i, -1]
    x = []
    for parts in st.columns:
        v = zero
        for idx, sg in parts:
            v = v + sg * s[idx]
        x.append(v)
    if exact:
        x_arr = np.array(x, dtype=object)
        val = sum((Fraction(_to_fraction(ci)) * xi for ci, xi in zip(lp.c, x)), Fraction(0))
        return LpSolution("optimal", x_arr, val, total_pivots)
    x_arr = np.asarray(x, dtype=float)
    return LpSolution("optimal", x_arr, float(lp.c @ x_arr), total_pivots)


# ---------------------------------------------------------------------------
# duality


def canonical_form(lp: LinearProgram) -> tuple[str, np.ndarray, np.ndarray, np.ndarray]:
    """Rewrite ``lp`` over non-negative variables in canonical inequality form.

    Minimization problems become ``min c.x, A x >= b, x >= 0``; maximization
    problems become ``max c.x, A x <= b, x >= 0``.  Free variables are split,
    equality rows are split into two inequalities and finite bounds become rows.
    Returns ``(direction, c, A, b)``.
    """
    st = _to_standard(lp, exact=False)
    c = np.asarray(st.c, dtype=float)
    if lp.direction == "max":
        c = -c
    want = ">=" if lp.direction == "min" else "<="
    rows, rhs = [], []
    for a, r, v in zip(st.A, st.rel, st.b):
        a = np.asarray(a, dtype=float)
        if r == "=":
            rows.extend([a, -a])
            rhs.extend([v, -v])
        elif r == want:
            rows.append(a)
            rhs.append(v)
        else:
            rows.append(-a)
            rhs.append(-v)
    A = np.vstack(rows) if rows else np.zeros((0, c.shape[0]))
    return lp.direction, c, A, np.asarray(rhs, dtype=float)


def dual_of(lp: LinearProgram) -> LinearProgram:
    """The LP dual of ``lp`` (after :func:`canonical_form`).

    ``min c.x, Ax >= b, x >= 0`` has dual ``max b.y, A^T y <= c, y >= 0`` and
    vice versa, so applying the map twice returns the canonical form.
    """
    direction, c, A, b = canonical_form(lp)
    m = A.shape[0]
    rel = "<=" if direction == "min" else ">="
    dual_dir = "max" if direction == "min" else "min"
    cons = [(A[:, j], rel, c[j]) for j in range(A.shape[1])]
    return LinearProgram.build(dual_dir, b, cons, [(0.0, None)] * m)
