import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leximin_approx.ellipsoid import (
    APPROX_FEASIBLE,
    CutLog,
    CutRecord,
    NoFeasiblePoint,
    OracleContract,
    PrimalColumn,
    PrimalTemplate,
    Violated,
    default_iterations,
    ellipsoid_maximize,
    extend_with_zeros,
    recover_reduced_primal,
    repeat_oracle,
    repetitions,
)
from leximin_approx.linprog import LinearProgram, solve


def row_oracle(A: np.ndarray, c: np.ndarray, beta: float = 0.0, nonneg: bool = True):
    """Separation for ``{y >= 0 : A^T y <= c}``, relaxed to ``(1 + beta) c``; column j has key j."""

    def oracle(y):
        if nonneg:
            for i in range(y.size):
                if y[i] < 0:
                    row = np.zeros(y.size)
                    row[i] = -1.0
                    return Violated(row, 0.0)
        slack = A.T @ y - (1.0 + beta) * c
        j = int(np.argmax(slack))
        if slack[j] > 0:
            return Violated(A[:, j].copy(), float(c[j]), key=j)
        return APPROX_FEASIBLE

    oracle.contract = OracleContract(beta, 1.0)
    return oracle


def covering_instance(rng: np.random.Generator):
    d = int(rng.integers(1, 6))
    cols = int(rng.integers(1, 7))
    A = rng.uniform(0.5, 2.0, (d, cols))
    b = rng.uniform(1.0, 3.0, d)
    c = rng.uniform(1.0, 3.0, cols)
    return A, b, c


def covering_template(A, b, c) -> PrimalTemplate:
    return PrimalTemplate(b, (">=",) * len(b), [], lambda j: PrimalColumn(A[:, j], float(c[j])))


def primal_optimum(A, b, c) -> float:
    lp = LinearProgram.build("min", c, [(A[i], ">=", b[i]) for i in range(len(b))])
    return solve(lp).objective_value


def radius_for(A, c) -> float:
    return 2.0 * math.sqrt(A.shape[0]) * c.max() / A.min()


class TestMaximize:
    def test_box(self):
        A = np.eye(2)
        res = ellipsoid_maximize([3, 2], row_oracle(A, np.ones(2)), radius=4.0)
        assert res.best_value == pytest.approx(5.0, abs=1e-4)

    def test_relaxed_oracle(self):
        A = np.eye(2)
        res = ellipsoid_maximize([3, 2], row_oracle(A, np.ones(2), 0.1), radius=4.0)
        assert res.best_value >= 5.0 - 1e-9
        assert np.all(A.T @ res.best_point <= 1.1 + 1e-12)

    def test_empty_region(self):
        def oracle(y):
            # y1 <= -1 and y1 >= 1 cannot both hold
            if y[0] > -1:
                return Violated(np.array([1.0, 0.0]), -1.0)
            return Violated(np.array([-1.0, 0.0]), -1.0)

        with pytest.raises(NoFeasiblePoint):
            ellipsoid_maximize([1, 0], oracle, radius=10.0, iterations=200)

    def test_one_dimension(self):
        res = ellipsoid_maximize([1], row_oracle(np.ones((1, 1)), np.array([3.0])), radius=5.0)
        assert res.best_value == pytest.approx(3.0, abs=1e-5)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            ellipsoid_maximize([1], lambda y: APPROX_FEASIBLE, radius=0.0)
        with pytest.raises(ValueError):
            ellipsoid_maximize([1], lambda y: APPROX_FEASIBLE, radius=1.0, iterations=0)

    def test_iteration_budget(self):
        assert default_iterations(2, 1.0) == math.ceil(12 * math.log(1e6))
        res = ellipsoid_maximize([1, 1], row_oracle(np.eye(2), np.ones(2)), radius=3.0, iterations=50)
        assert len(res.cut_log) <= 50

    @given(st.integers(0, 100_000))
    @settings(max_examples=25, deadline=None)
    def test_matches_simplex(self, seed):
        A, b, c = covering_instance(np.random.default_rng(seed))
        res = ellipsoid_maximize(b, row_oracle(A, c), radius_for(A, c))
        assert res.best_value == pytest.approx(primal_optimum(A, b, c), abs=1e-4)


class TestInvariants:
    def test_volume_decreases(self):
        A, b, c = covering_instance(np.random.default_rng(3))
        res = ellipsoid_maximize(b, row_oracle(A, c), radius_for(A, c))
        assert all(later < earlier for earlier, later in zip(res.log_dets, res.log_dets[1:]))

    def test_shape_stays_symmetric_positive(self):
        A, b, c = covering_instance(np.random.default_rng(4))
        res = ellipsoid_maximize(b, row_oracle(A, c), radius_for(A, c), iterations=100)
        P = res.state.shape
        assert np.allclose(P, P.T, atol=1e-12 * np.abs(P).max())
        assert np.linalg.eigvalsh(0.5 * (P + P.T)).min() > 0

    def test_cuts_keep_feasible_points(self):
        rng = np.random.default_rng(5)
        A, b, c = covering_instance(rng)
        # sample exactly feasible points and check that no feasibility cut removes them
        samples = rng.uniform(0, 1, (200, A.shape[0]))
        samples *= (c.min() / (A.sum(axis=0).max() + 1e-12))
        assert np.all(A.T @ samples.T <= c[:, None] + 1e-12)
        res = ellipsoid_maximize(b, row_oracle(A, c), radius_for(A, c), iterations=300)
        for rec in res.cut_log.entries:
            if rec.kind == "feasibility":
                assert np.all(samples @ rec.row <= rec.rhs + 1e-12)

    def test_violated_rows_hold_at_center(self):
        A, b, c = covering_instance(np.random.default_rng(6))
        seen = []
        base = row_oracle(A, c)

        def recording(y):
            resp = base(y)
            if isinstance(resp, Violated):
                seen.append(resp.row @ y > resp.rhs)
            return resp

        ellipsoid_maximize(b, recording, radius_for(A, c), iterations=200)
        assert seen and all(seen)


class TestPrimalRecovery:
    def test_toy_covering(self):
        A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        b = np.array([1.0, 1.0])
        c = np.array([1.0, 1.0, 1.5])
        res = ellipsoid_maximize(b, row_oracle(A, c), radius_for(A + 0.5, c))
        reduced = recover_reduced_primal(covering_template(A, b, c), res.cut_log)
        sol = solve(reduced.lp)
        assert sol.objective_value == pytest.approx(primal_optimum(A, b, c), abs=1e-6)
        fixed, sparse = extend_with_zeros(sol.x, reduced)
        assert fixed.size == 0 and len(sparse) <= len(reduced.keys)
        full = np.zeros(3)
        for key, v in sparse.items():
            full[key] = v
        assert np.all(A @ full >= b - 1e-9)
        assert c @ full == pytest.approx(sol.objective_value)

    def test_duplicates_collapse(self):
        A, b, c = covering_instance(np.random.default_rng(9))
        t = covering_template(A, b, c)
        one = recover_reduced_primal(t, [0, 0, 0])
        assert one.keys == (0,)
        assert solve(one.lp).objective_value == pytest.approx(solve(recover_reduced_primal(t, [0]).lp).objective_value)

    def test_seeds_come_first(self):
        log = CutLog([CutRecord("feasibility", 0, 2)], [CutRecord("seed", -1, 1)])
        assert log.feasibility_keys() == [1, 2]

    def test_zero_solution(self):
        reduced = recover_reduced_primal(covering_template(np.ones((1, 2)), np.ones(1), np.ones(2)), [0, 1])
        assert extend_with_zeros(np.zeros(2), reduced)[1] == {}

    @given(st.integers(0, 100_000))
    @settings(max_examples=25, deadline=None)
    def test_approximation_chain(self, seed):
        A, b, c = covering_instance(np.random.default_rng(seed))
        opt = primal_optimum(A, b, c)
        for beta in (0.0, 0.1):
            res = ellipsoid_maximize(b, row_oracle(A, c, beta), radius_for(A, c))
            sol = solve(recover_reduced_primal(covering_template(A, b, c), res.cut_log).lp)
            assert sol.optimal
            assert sol.objective_value >= opt - 1e-6
            assert sol.objective_value <= (1 + beta) * opt + 1e-6

    def test_randomized_oracle_still_feasible(self):
        # an oracle that sometimes misses violations only loses columns, never feasibility
        rng = np.random.default_rng(10)
        A, b, c = covering_instance(rng)
        base = row_oracle(A, c)
        noise = np.random.default_rng(0)

        def flaky(y):
            return base(y) if noise.random() < 0.6 else APPROX_FEASIBLE

        res = ellipsoid_maximize(b, flaky, radius_for(A, c))
        reduced = recover_reduced_primal(covering_template(A, b, c), res.cut_log)
        sol = solve(reduced.lp)
        if sol.optimal:
            _, sparse = extend_with_zeros(sol.x, reduced)
            full = np.zeros(A.shape[1])
            for key, v in sparse.items():
                full[key] = v
            assert np.all(A @ full >= b - 1e-9)


class TestRepetitions:
    def test_values(self):
        assert repetitions(1.0, 3, 10) == 1
        assert repetitions(0.5, 8, 1) == 4
        assert repetitions(0.9, 100, 1) == 3
        assert repetitions(0.9, 10, 10) == 3

    def test_failure_bound(self):
        for p in (0.3, 0.5, 0.8):
            for nI in (1, 5, 50, 1000):
                T = repetitions(p, nI, 1)
                assert (1 - p) ** T <= (1 - p) / nI + 1e-15

    def test_boosted_oracle(self):
        calls = []

        def weak(y):
            calls.append(1)
            return APPROX_FEASIBLE

        weak.contract = OracleContract(0.0, 0.5)
        boosted = repeat_oracle(weak, 8, 1)
        assert boosted.repeats == 4
        assert boosted(np.zeros(1)) is APPROX_FEASIBLE and len(calls) == 4
        assert boosted.contract.p == pytest.approx(1 - 0.5**4)

    def test_violation_short_circuits(self):
        hit = Violated(np.ones(1), 0.0)
        boosted = repeat_oracle(lambda y: hit, 3, 3)
        assert boosted(np.ones(1)) is hit

    def test_contract_range(self):
        with pytest.raises(ValueError):
            OracleContract(-0.1, 1.0)
        with pytest.raises(ValueError):
            OracleContract(0.0, 0.0)
