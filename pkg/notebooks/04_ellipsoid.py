# %% [markdown]
# # Ellipsoid method with an approximate separation oracle
#
# Maximize `b.y` over `{y >= 0 : A^T y <= c}` using only a row oracle, then
# rebuild a small primal from the rows the oracle returned.

# %%
import numpy as np

from leximin_approx import APPROX_FEASIBLE, LinearProgram, PrimalColumn, PrimalTemplate, Violated, ellipsoid_maximize
from leximin_approx import recover_reduced_primal, solve

rng = np.random.default_rng(1)
A = rng.uniform(0.5, 2.0, (3, 8))
b = rng.uniform(1.0, 3.0, 3)
c = rng.uniform(1.0, 3.0, 8)


def oracle_with_slack(beta):
    def oracle(y):
        if (y < 0).any():
            i = int(np.argmin(y))
            return Violated(-np.eye(y.size)[i], 0.0)
        slack = A.T @ y - (1 + beta) * c
        j = int(np.argmax(slack))
        return Violated(A[:, j], float(c[j]), key=j) if slack[j] > 0 else APPROX_FEASIBLE
    return oracle


opt = solve(LinearProgram.build("min", c, [(A[i], ">=", b[i]) for i in range(3)])).objective_value
radius = 2 * np.sqrt(3) * c.max() / A.min()
template = PrimalTemplate(b, (">=",) * 3, [], lambda j: PrimalColumn(A[:, j], float(c[j])))

# %%
for beta in (0.0, 0.1, 0.3):
    res = ellipsoid_maximize(b, oracle_with_slack(beta), radius)
    reduced = recover_reduced_primal(template, res.cut_log)
    value = solve(reduced.lp).objective_value
    print(f"beta={beta}: dual {res.best_value:.5f}, primal from {len(reduced.keys)} columns {value:.5f}, "
          f"optimum {opt:.5f}, ratio {value / opt:.4f}")
