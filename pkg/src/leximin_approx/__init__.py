"""Leximin approximation for multi-objective optimization and stochastic allocation."""

from .allocation import (
    AllocationInstance,
    BruteForceUtilitarian,
    C2Solution,
    DualPoint,
    EllipsoidConfig,
    GreedyUtilitarian,
    RandomizedUtilitarian,
    SimpleAllocation,
    StochasticAllocation,
    ValueOracle,
    brute_force_stochastic_leximin,
    c2_to_c1,
    expected_utilities,
    expected_utility,
    greedy_utilitarian,
    separation_oracle_d3,
    solve_c2,
    solve_stochastic_leximin,
    verify_allocation,
)
from .ellipsoid import (
    APPROX_FEASIBLE,
    ApproxFeasible,
    CutLog,
    EllipsoidState,
    NoFeasiblePoint,
    OracleContract,
    PrimalColumn,
    PrimalTemplate,
    Violated,
    ellipsoid_maximize,
    extend_with_zeros,
    recover_reduced_primal,
    repeat_oracle,
    repetitions,
)
from .linprog import LinearProgram, LpSolution, dual_of, solve
from .order import (
    EXACT,
    ApproxFactors,
    PreferenceWitness,
    factor_transform,
    is_approx_leximin_optimal,
    is_leximin_preferred,
    leximin_maximum,
    relation_set,
    sort_outcomes,
)
from .ordered_outcomes import (
    LeximinResult,
    OpContract,
    OpOutcome,
    ScriptedOp,
    exact_enum_op,
    exact_lp_op,
    exact_op,
    noisy_op,
    randomized_op,
    run_ordered_outcomes,
    verify_result,
)
from .programs import IterationLedger, MultiObjectiveProblem
from .saturation import IterationCapExceeded, saturation_solve, scaled_solver

__all__ = [name for name in dir() if not name.startswith("_")]
