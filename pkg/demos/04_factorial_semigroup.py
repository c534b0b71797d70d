"""
The factorial semigroup
=======================

With a_n = (n!)^3 and t_N = N (N!)^3 the operator exp(-t_N A^{-1}) almost
equals the tail projection Q_N.  Everything factorial is kept in logs.
"""

from rboundlab import (FactorialSchedule, SearchConfig, build_haar_l1, counterexample_report,
                       measure_norm_diff, norm_diff_rhs, semigroup_symbol)

schedule = FactorialSchedule.build(6)

# %%
# The symbol drops from e^{-N} at n = N to nearly one at n = N + 1.
for N in (1, 2, 3):
    print(N, semigroup_symbol(schedule, N, n_blocks=6).values.round(6))

# %%
# Measured distance to Q_N against the closed-form bound on a 1024-point
# Haar grid.
haar = build_haar_l1(10)
for N in range(1, 7):
    bound, simplified = norm_diff_rhs(N, haar.K)
    print(f"N={N}  measured {measure_norm_diff(haar, schedule, N):.5f}  "
          f"bound {bound:.5f}  simplified {simplified:.5f}")

# %%
# The full report on a smaller grid: witnesses found for the tails are
# re-evaluated on the semigroup operators.
report = counterexample_report(build_haar_l1(5), FactorialSchedule.build(5),
                               search_cfg=SearchConfig(restarts=3, steps=150))
print(report.to_csv())
print("checks:", report.checks)
