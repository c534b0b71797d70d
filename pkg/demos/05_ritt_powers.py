"""
Powers of a Ritt multiplier
===========================

T = exp(-A^{-1}) has an increasing symbol in (0, 1).  The variation of its
powers never exceeds two, which bounds every T^n at once.
"""

import numpy as np

from rboundlab import (FactorialSchedule, build_haar_l1, multiplier_matrix, ritt_power_symbol,
                       ritt_set_bounds, semigroup_symbol)

model = build_haar_l1(3)
T_sym = semigroup_symbol(FactorialSchedule.build(8), log_t=0.0, n_blocks=model.n_blocks)

# %%
# Bounds on T^n and n T^n (I - T) for n up to a million; dense norms are
# measured where matrix powers are cheap.
report = ritt_set_bounds(model, T_sym, [1, 10, 100, 10**4, 10**6])
print(report.to_csv())
print("sup var bound:", report.power_constant, " second family constant:", report.second_constant)

# %%
# The symbol route agrees with repeated multiplication.
T = multiplier_matrix(model, T_sym)
for n in (2, 7, 20):
    diff = np.abs(np.linalg.matrix_power(T, n) - multiplier_matrix(model, ritt_power_symbol(T_sym, n))).max()
    print(f"n={n}  max |T^n - symbol| = {diff:.2e}")
