# %% [markdown]
# # Noisy and randomized procedures
#
# Replace the exact per-iteration solver by one whose value is only
# approximately optimal, or which succeeds only with some probability, and
# check the end-to-end guarantee on random instances.

# %%
import numpy as np

from leximin_approx import ApproxFactors, MultiObjectiveProblem, exact_enum_op, exact_op, noisy_op, randomized_op
from leximin_approx import run_ordered_outcomes, verify_result

rng = np.random.default_rng(0)
for factors in (ApproxFactors(0.9, 0), ApproxFactors(1.0, 0.05), ApproxFactors(0.8, 0.1)):
    bad = 0
    for seed in range(100):
        problem = MultiObjectiveProblem.finite(rng.integers(0, 21, (30, 4)))
        result = run_ordered_outcomes(problem, noisy_op(exact_op, factors, seed))
        bad += not verify_result(result, problem).ok
    print(f"{factors}: claimed {result.claimed_factors}, failed checks {bad}/100")

# %% [markdown]
# With success probability 0.8 per call and three objectives, full runs are
# optimal at least 0.8^3 of the time.

# %%
hits = 0
for seed in range(2000):
    problem = MultiObjectiveProblem.finite(rng.integers(0, 21, (10, 3)))
    best = run_ordered_outcomes(problem, exact_enum_op).sorted_utilities
    res = run_ordered_outcomes(problem, randomized_op(exact_enum_op, 0.8, seed))
    hits += np.array_equal(res.sorted_utilities, best)
print(f"optimal in {hits / 2000:.3f} of runs, bound {0.8 ** 3:.3f}")
