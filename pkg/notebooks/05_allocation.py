# %% [markdown]
# # Leximin stochastic allocation of indivisible items
#
# Solve small instances with the greedy utilitarian maximizer and with the
# exhaustive one, and compare with an exhaustive leximin solution.

# %%
import numpy as np

from leximin_approx import (
    AllocationInstance,
    BruteForceUtilitarian,
    GreedyUtilitarian,
    ValueOracle,
    brute_force_stochastic_leximin,
    solve_stochastic_leximin,
    verify_allocation,
)

instances = {
    "one item, two agents": AllocationInstance(2, 1, [ValueOracle.additive([1]), ValueOracle.additive([1])]),
    "crossed preferences": AllocationInstance(2, 2, [ValueOracle.additive([2, 1]), ValueOracle.additive([1, 2])]),
    "coverage": AllocationInstance(2, 3, [ValueOracle.coverage([[0, 1], [1], [2]]), ValueOracle.coverage([[0], [0, 1], [1, 2]])]),
}
rng = np.random.default_rng(3)
instances["random 3x3"] = AllocationInstance(3, 3, [ValueOracle.additive(rng.integers(1, 10, 3)) for _ in range(3)])

# %%
for name, inst in instances.items():
    ref = brute_force_stochastic_leximin(inst)
    exact = solve_stochastic_leximin(inst, BruteForceUtilitarian())
    greedy = solve_stochastic_leximin(inst, GreedyUtilitarian())
    ok = verify_allocation(greedy, inst, [ref.solution]).ok
    print(f"{name}:")
    print(f"  reference  {np.round(ref.sorted_utilities, 4)}")
    print(f"  exhaustive {np.round(exact.sorted_utilities, 4)}")
    print(f"  greedy     {np.round(greedy.sorted_utilities, 4)}  claimed alpha {greedy.claimed_factors.alpha:.3f}, check {ok}")

# %%
for alloc, p in solve_stochastic_leximin(instances["crossed preferences"]).solution.support:
    print(alloc.owner, round(p, 4))
