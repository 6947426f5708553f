# %% [markdown]
# # Check averages and overlap forms
#
# Averaging a replica bracket over all checks of a fixed type on distinct
# free sockets is sandwiched around the with-replacement average, which
# factorizes into a product of positional overlaps.

# %%
import numpy as np

from sclab.channels import bsc, sample_hllr_vector
from sclab.ensembles import empty_graph, pattern_from_degrees
from sclab.gibbs import check_average_bounds, jensen_forms, overlap_product_bracket

rng = np.random.default_rng(7)
pattern = pattern_from_degrees({1: [40, 41, 42], 2: [40, 43, 41]})
graph = empty_graph(pattern, 4)
h = sample_hllr_vector(bsc(0.1), pattern, rng)
alpha = (1, 2, 2, 1)
chk = check_average_bounds(alpha, graph, h, r=2)
print(f"{chk.lower:.4f} <= {chk.avg_distinct:.4f} <= {chk.upper:.4f}  (m = {chk.m})")
print("collisions", chk.collision_count, "<= bound", round(chk.collision_bound, 1))
print("overlap product", overlap_product_bracket(alpha, graph, h, 2))

# %% [markdown]
# For even K the three type kinds produce the overlap forms
# conn <= coup <= disc pointwise, by convexity.

# %%
Q = rng.uniform(-1, 1, size=(10_000, 6))
for K in (2, 4, 6):
    conn, coup, disc = jensen_forms(Q, K, w=3)
    print(K, bool(np.all(conn <= coup + 1e-15)), bool(np.all(coup <= disc + 1e-15)))
