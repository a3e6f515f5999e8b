# %% [markdown]
# # Why saturation needs exact solvers
#
# The saturation loop raises a common level and then tests which objectives
# can go higher. With a solver that returns 98% of the optimum, every test
# reports slack, nothing is ever frozen and the loop hits its cap.

# %%
from leximin_approx import IterationCapExceeded, MultiObjectiveProblem, saturation_solve, scaled_solver

problem = MultiObjectiveProblem.linear([([1, 1], "<=", 1)], [[1, 0], [0, 1]])
print("exact:", saturation_solve(problem).utilities)

try:
    saturation_solve(problem, solver=scaled_solver(0.98))
except IterationCapExceeded as exc:
    first = exc.rounds[0]
    print(f"level {first.level:.3f}, tests {[round(v, 3) for v in first.tests.values()]}, "
          f"stopped after {len(exc.rounds)} rounds")
