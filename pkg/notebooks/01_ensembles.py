# %% [markdown]
# # Sampling ensembles
#
# A configuration pattern fixes the variables at each position and their
# socket counts. Graphs are then built by placing checks of size K on free
# sockets, either uniformly (the simple ensemble) or through windows of w
# consecutive positions (the coupled ensemble).

# %%
import numpy as np

from sclab.ensembles import (
    DegreeDistribution,
    EnsembleSpec,
    is_m_admissible,
    sample_configuration_pattern,
    sample_coupled_graph,
    sample_simple_graph,
    sample_types,
)

dist = DegreeDistribution.regular(3)
rng = np.random.default_rng(0)
pattern = sample_configuration_pattern(50, 6, dist, rng=rng)
print("variables", pattern.n_variables, "sockets per position", pattern.socket_counts())

# %%
simple = sample_simple_graph(pattern, 6, rng)
coupled = sample_coupled_graph(pattern, 3, 6, "closed", rng)
print("simple:  checks", simple.n_checks, "free sockets", simple.n_free)
print("coupled: checks", coupled.n_checks, "free sockets", coupled.n_free, "stopped early", coupled.stopped_early)

# %% [markdown]
# A check's type lists the position of each of its K edges. In the coupled
# ensemble every check stays inside one window, so the spread of positions in
# a type never exceeds w - 1 (modulo L on the closed chain).

# %%
L = 6
types = np.sort(coupled.check_types, axis=1)
gaps = np.diff(np.concatenate([types, types[:, :1] + L], axis=1), axis=1)
spread = L - gaps.max(axis=1)
print("largest circular spread:", spread.max(), "<= w - 1 =", 2)

# %% [markdown]
# Three type kinds drive the interpolation: `conn` (positions uniform on the
# whole chain), `coup` (uniform within a window) and `disc` (all edges at one
# position). A multiset of types is m-admissible when every position keeps at
# least m free sockets after it is placed.

# %%
spec = EnsembleSpec(500, 4, 2, 6, dist, "simple")
T = spec.T
m = spec.admissibility_m
print(f"T = {T} checks, m = {m:.1f}")
pat = spec.sample_pattern(rng)
mix = np.concatenate([sample_types(k, T // 3, 4, 2, 6, rng) for k in ("conn", "coup", "disc")])
print("admissible:", is_m_admissible(mix, pat, int(m)))
