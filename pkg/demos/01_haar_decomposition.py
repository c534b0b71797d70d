"""
Haar projections in L1
======================

Build the Haar decomposition of a dyadic L1 grid, check that its partial sums
are contractions and look at what the blocks do to a point mass.
"""

import numpy as np

from rboundlab import build_haar_l1, operator_norm, partial_sum, validate_decomposition

# %%
# Three levels give eight blocks on an eight-point grid.  Each block is the
# rank-one projection onto one Haar function.
model = build_haar_l1(3)
print(model.space.describe(), model.name)
print("blocks:", model.n_blocks, "dimension:", model.dim, "K:", model.K)

# %%
# The axioms hold to rounding error.
report = validate_decomposition(model)
print("axioms pass:", report.passed, "worst residual:", report.worst)

# %%
# Every partial sum P_N is an averaging operator, so its L1 norm is one.
for N in range(1, model.n_blocks + 1):
    val, exact = operator_norm(model.space, partial_sum(model, N))
    print(f"||P_{N}|| = {val:.6f}")

# %%
# A point mass at the left end is smeared out by the early partial sums and
# only recovered at N = M.
x = np.zeros(model.dim)
x[0] = 1.0
for N in (1, 2, 4, 8):
    print(N, np.round(partial_sum(model, N) @ x, 3))
