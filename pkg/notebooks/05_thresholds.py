# %% [markdown]
# # Thresholds on the BEC
#
# Density evolution gives the BP threshold; the BP-GEXIT curve and its
# area give the area threshold. Coupled chains push the BP threshold up to
# the area threshold as the window grows.

# %%
import numpy as np

from sclab.ensembles import DegreeDistribution, EnsembleSpec, design_rate
from sclab.thresholds import (
    area_threshold,
    bp_gexit_curve,
    bp_threshold,
    coupled_bp_threshold,
    map_gexit_empirical,
)

dist, K = DegreeDistribution.regular(3), 6
eps_bp = bp_threshold(dist, K)
curve = bp_gexit_curve(dist, K, np.linspace(0, 1, 201))
eps_area = area_threshold(curve, design_rate(dist, K))
print(f"eps_BP = {eps_bp:.5f}, eps_area = {eps_area:.5f}")

# %%
for w in (2, 3, 4):
    t = coupled_bp_threshold(dist, K, 32, w)
    print(f"L=32 w={w}: {t:.5f}  gap {eps_area - t:.2e}")

# %% [markdown]
# The MAP-GEXIT curve is the derivative of the average conditional entropy,
# estimated here by central differences of rank-oracle Monte Carlo.

# %%
grid = [0.40, 0.45, 0.50, 0.55]
mc = map_gexit_empirical(EnsembleSpec(256, 1, 1, K, dist), grid, 0.01, trials=80, seed=4)
bp = bp_gexit_curve(dist, K, grid)
for e, gm, se, gb in zip(grid, mc.g, mc.error, bp.g):
    print(f"eps={e:.2f}  g_MAP={gm:.3f} +- {se:.3f}  g_BP={gb:.3f}")
