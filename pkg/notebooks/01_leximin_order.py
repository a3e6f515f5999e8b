# %% [markdown]
# # Approximate leximin comparisons
#
# Compare three outcome vectors under several (alpha, epsilon) factor pairs and
# list which ordered pairs are strictly preferred.

# %%
import numpy as np

from leximin_approx import ApproxFactors, factor_transform, is_leximin_preferred, relation_set

x = np.array([1, 10, 15])
y = np.array([1, 40, 60])
z = np.array([2, 20, 30])
names = "xyz"

# %%
for alpha in (1.0, 0.75, 0.5, 0.25):
    for eps in (0, 1, 15, 45):
        pairs = sorted(names[i] + names[j] for i, j in relation_set([x, y, z], ApproxFactors(alpha, eps)))
        print(f"alpha={alpha:<4} eps={eps:<4} preferred pairs: {', '.join(pairs) or '-'}")

# %% [markdown]
# The witness records the smallest sorted position at which one vector beats
# the other by the required margin.

# %%
print(is_leximin_preferred(z, y, ApproxFactors(0.75, 0)))
print(is_leximin_preferred(z, y, ApproxFactors(0.5, 0)))

# %% [markdown]
# Per-iteration factors degrade when composed over a full run.

# %%
for a in (0.5, 0.8, 0.9, 1 - 1 / np.e):
    print(f"{a:.4f} -> {factor_transform(ApproxFactors(a, 0)).alpha:.6f}")
