"""
Random sign averages and a witness search
=========================================

Uniformly bounded is not the same as R-bounded.  On the Haar model the partial
sums all have norm one, yet the search below finds vectors whose random-sign
average grows by a factor above one.
"""

import numpy as np

from rboundlab import (RademacherConfig, SearchConfig, SpaceModel, build_coordinate_decomposition,
                       build_haar_l1, partial_sum, rademacher_norm_exact, rademacher_norm_mc,
                       rbound_curve)

# %%
# Exact averages enumerate half of the sign patterns; the Monte Carlo estimate
# comes with a 95% half-width.
rng = np.random.default_rng(0)
X = rng.standard_normal((8, 4))
space = SpaceModel.lp(4, 1)
exact = rademacher_norm_exact(X, space)
est, hw = rademacher_norm_mc(X, space, samples=20000, seed=1)
print(f"exact {exact:.5f}  estimate {est:.5f} +/- {hw:.5f}")

# %%
# Lower-bound curve for {P_1, ..., P_N} on the Haar model.  Each witness is
# reused as a warm start for the next N, so the curve never decreases.
haar = build_haar_l1(4)
families = [[partial_sum(haar, n) for n in range(1, N + 1)] for N in range(1, 9)]
witnesses = rbound_curve(families, haar.space, SearchConfig(restarts=4, steps=300))
for N, w in enumerate(witnesses, start=1):
    print(f"N={N}  lower bound {w.ratio:.4f}  (K = {haar.K:.1f})")

# %%
# In Hilbert space orthogonal projections give a flat curve at one.
coord = build_coordinate_decomposition(SpaceModel.lp(8, 2), [1] * 8)
families = [[partial_sum(coord, n) for n in range(1, N + 1)] for N in range(1, 9)]
flat = rbound_curve(families, coord.space, SearchConfig(restarts=2, steps=100),
                    RademacherConfig(moment="second"))
print("l2 curve:", [round(w.ratio, 6) for w in flat])
