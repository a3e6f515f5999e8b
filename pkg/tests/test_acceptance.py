"""End-to-end acceptance criteria, one test each, with their tolerances and time budgets."""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from leximin_approx.allocation import (
    BruteForceUtilitarian,
    GreedyUtilitarian,
    brute_force_stochastic_leximin,
    solve_stochastic_leximin,
    verify_allocation,
)
from leximin_approx.cli import EXIT_OK, EXIT_VERIFY, main
from leximin_approx.ellipsoid import ellipsoid_maximize, recover_reduced_primal
from leximin_approx.linprog import solve
from leximin_approx.order import ApproxFactors, factor_transform, relation_set
from leximin_approx.ordered_outcomes import (
    ScriptedOp,
    exact_enum_op,
    exact_op,
    noisy_op,
    randomized_op,
    run_ordered_outcomes,
    verify_result,
)
from leximin_approx.programs import (
    IterationLedger,
    MultiObjectiveProblem,
    build_p2_explicit,
    build_p3,
    p2_explicit_feasible,
    p2_to_p3_witness,
    p3_to_p2_projection,
    p3_violations,
    p3_witness_from_vector,
)
from leximin_approx.saturation import IterationCapExceeded, saturation_solve, scaled_solver

from conftest import ACCEPTANCE_LINES, DATA, X, Y, Z, corpus, random_finite_problem, random_linear_problem
from oracles import brute_force_leximin_vector, compact_optimum_by_vertices
from test_ellipsoid import covering_instance, covering_template, primal_optimum, radius_for, row_oracle
from test_order import NAMES, TABLE


@contextmanager
def criterion(number: int, title: str, budget: float | None = None):
    """Run a criterion body, record one pass/fail line and enforce the time budget."""
    start = time.perf_counter()
    status, detail = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None and elapsed >= budget:
            detail = f"took {elapsed:.2f}s, budget {budget:g}s"
            raise AssertionError(detail)
        status, detail = "PASS", f"{elapsed:.2f}s"
    except BaseException as exc:
        detail = detail or f"{type(exc).__name__}: {exc}"[:200]
        raise
    finally:
        line = f"criterion {number}: {status} - {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)


def test_criterion_01_relation_table():
    with criterion(1, "relation table for three vectors over 16 factor pairs", budget=1.0):
        for (alpha, eps), expected in TABLE.items():
            got = {NAMES[i] + NAMES[j] for i, j in relation_set([X, Y, Z], ApproxFactors(alpha, eps))}
            assert got == expected, (alpha, eps, got)


def test_criterion_02_adversarial_trace(tmp_path):
    with criterion(2, "scripted (0.9, 0) run and probe check", budget=1.0):
        prob = MultiObjectiveProblem.linear([([1, 0], "<=", 100), ([1, 1], "<=", 200)], [[1, 0], [0, 1]])
        res = run_ordered_outcomes(prob, ScriptedOp([(90, [90, 110]), (99, [94.5, 94.5])], ApproxFactors(0.9, 0)))
        assert np.allclose(res.utilities, [94.5, 94.5], atol=1e-9)
        out = tmp_path / "result.json"
        assert main([
            "leximin", "--input", str(DATA / "two_stage_problem.json"), "--op", "scripted",
            "--trace", str(DATA / "adversarial_trace.json"), "--alpha", "0.9", "--output", str(out),
        ]) == EXIT_OK
        common = ["check", "--input", str(DATA / "two_stage_problem.json"), "--result", str(out),
                  "--probes", str(DATA / "adversarial_probes.json"), "--tolerance", "1e-9"]
        assert main(common + ["--alpha", "0.9"]) == EXIT_VERIFY
        report = verify_result(res, prob, [np.array([94.5, 105.5])], ApproxFactors(0.9, 0), tol=1e-9)
        assert report.violations[0][1].k == 2
        transformed = factor_transform(ApproxFactors(0.9, 0))
        assert abs(transformed.alpha - 81 / 91) < 1e-15
        assert main(common + ["--alpha", repr(transformed.alpha)]) == EXIT_OK


def test_criterion_03_factor_arithmetic():
    with criterion(3, "factor transform values"):
        assert abs(factor_transform(ApproxFactors(0.5, 0)).alpha - 1 / 3) < 1e-12
        a = 1 - 1 / math.e
        out = factor_transform(ApproxFactors(a, 0))
        assert abs(out.alpha - (math.e - 1) ** 2 / (math.e**2 - math.e + 1)) < 1e-12
        assert out.epsilon == 0


def test_criterion_04_exact_finite_suite():
    with criterion(4, "500 random finite instances match sort-and-compare", budget=10.0):
        rng = np.random.default_rng(2024)
        for _ in range(500):
            prob = random_finite_problem(rng, max_objectives=5, max_candidates=40)
            res = run_ordered_outcomes(prob, exact_enum_op)
            assert np.array_equal(res.sorted_utilities, brute_force_leximin_vector(prob.candidates))


def test_criterion_05_program_equivalence():
    with criterion(5, "three program forms agree on 200 linear instances", budget=30.0):
        rng = np.random.default_rng(5)
        for _ in range(200):
            prob = random_linear_problem(rng, max_vars=4, max_objectives=4)
            led = IterationLedger()
            for _ in range(prob.n):
                sol = solve(build_p3(prob, led))
                explicit = solve(build_p2_explicit(prob, led))
                z = sol.objective_value
                assert abs(explicit.objective_value - z) <= 1e-7
                assert abs(compact_optimum_by_vertices(prob, led) - z) <= 1e-7
                x, zt = p3_to_p2_projection(prob, led, p3_witness_from_vector(prob, led, sol.x))
                assert p2_explicit_feasible(prob, led, x, zt)
                assert p3_violations(prob, led, p2_to_p3_witness(prob, led, x, zt)) == []
                led = led.extended(x, zt)


def test_criterion_06_noisy_guarantee():
    with criterion(6, "200 noisy runs without violations at transformed factors"):
        grid = [ApproxFactors(0.9, 0), ApproxFactors(1.0, 0.05), ApproxFactors(0.8, 0.1)]
        rng = np.random.default_rng(6)
        violations = 0
        for i in range(200):
            factors = grid[i % 3]
            if i % 2 == 0:
                prob = random_finite_problem(rng)
                tol = 1e-9
            else:
                prob = random_linear_problem(rng, max_vars=3, max_objectives=3)
                tol = 1e-6
            res = run_ordered_outcomes(prob, noisy_op(exact_op, factors, seed=i))
            assert res.claimed_factors == factor_transform(factors)
            violations += len(verify_result(res, prob, tol=tol).violations)
        assert violations == 0


def test_criterion_07_ellipsoid_vs_simplex():
    with criterion(7, "ellipsoid on 100 dense programs", budget=60.0):
        rng = np.random.default_rng(7)
        for _ in range(100):
            A, b, c = covering_instance(rng)
            opt = primal_optimum(A, b, c)
            exact = ellipsoid_maximize(b, row_oracle(A, c), radius_for(A, c))
            assert abs(exact.best_value - opt) <= 1e-4
            relaxed = ellipsoid_maximize(b, row_oracle(A, c, 0.1), radius_for(A, c))
            rec = solve(recover_reduced_primal(covering_template(A, b, c), relaxed.cut_log).lp)
            assert rec.objective_value <= 1.1 * opt + 1e-6


def test_criterion_08_allocation_end_to_end():
    with criterion(8, "allocation pipeline against brute force on the corpus", budget=120.0):
        instances = {k: v for k, v in corpus().items() if v.n**v.m <= 64}
        assert "symmetric_2x1" in instances and "disjoint_2x2" in instances
        for name, inst in instances.items():
            ref = brute_force_stochastic_leximin(inst)
            exact = solve_stochastic_leximin(inst, BruteForceUtilitarian())
            assert np.max(np.abs(exact.sorted_utilities - ref.sorted_utilities)) <= 1e-5, name
            greedy = solve_stochastic_leximin(inst, GreedyUtilitarian())
            assert verify_allocation(greedy, inst, [ref.solution], ApproxFactors(1 / 3, 0)).ok, name
        assert brute_force_stochastic_leximin(instances["symmetric_2x1"]).sorted_utilities == pytest.approx([0.5, 0.5])
        assert brute_force_stochastic_leximin(instances["disjoint_2x2"]).sorted_utilities == pytest.approx([1, 1])


def test_criterion_09_probability_composition():
    with criterion(9, "full-run success rate with p = 0.8 over 5000 runs"):
        p, runs = 0.8, 5000
        rng = np.random.default_rng(9)
        successes = 0
        for i in range(runs):
            prob = MultiObjectiveProblem.finite(rng.integers(0, 21, (int(rng.integers(2, 12)), 3)))
            res = run_ordered_outcomes(prob, randomized_op(exact_enum_op, p, seed=i))
            successes += np.array_equal(res.sorted_utilities, brute_force_leximin_vector(prob.candidates))
        target = p**3
        sigma = math.sqrt(target * (1 - target) / runs)
        assert successes / runs >= target - 3 * sigma


def test_criterion_10_saturation_demo():
    with criterion(10, "saturation loop converges when exact and stalls at 0.49"):
        prob = MultiObjectiveProblem.linear([([1, 1], "<=", 1)], [[1, 0], [0, 1]])
        assert np.allclose(saturation_solve(prob).utilities, [0.5, 0.5])
        with pytest.raises(IterationCapExceeded) as exc:
            saturation_solve(prob, solver=scaled_solver(0.98))
        first = exc.value.rounds[0]
        assert first.level == pytest.approx(0.49)
        assert all(v == pytest.approx(0.51) for v in first.tests.values())
