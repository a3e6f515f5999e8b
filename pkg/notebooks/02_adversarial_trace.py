# %% [markdown]
# # An adversarial per-iteration procedure
#
# Two objectives over `x1 <= 100, x1 + x2 <= 200`. A procedure allowed to be off
# by a factor 0.9 at every step can steer the run to (94.5, 94.5), while the
# exact leximin optimum is (100, 100).

# %%
import numpy as np

from leximin_approx import (
    ApproxFactors,
    MultiObjectiveProblem,
    ScriptedOp,
    exact_op,
    is_leximin_preferred,
    run_ordered_outcomes,
    verify_result,
)

problem = MultiObjectiveProblem.linear([([1, 0], "<=", 100), ([1, 1], "<=", 200)], [[1, 0], [0, 1]])
print("exact:", run_ordered_outcomes(problem, exact_op).utilities)

scripted = ScriptedOp([(90, [90, 110]), (99, [94.5, 94.5])], ApproxFactors(0.9, 0))
result = run_ordered_outcomes(problem, scripted)
print("scripted:", result.utilities, "claimed alpha:", result.claimed_factors.alpha)

# %% [markdown]
# The point (94.5, 105.5) beats the result at factor 0.9 (second sorted
# entry), but not at the composed factor 81/91.

# %%
probe = np.array([94.5, 105.5])
print(is_leximin_preferred(probe, result.utilities, ApproxFactors(0.9, 0)))
print(verify_result(result, problem, [probe]).ok)
