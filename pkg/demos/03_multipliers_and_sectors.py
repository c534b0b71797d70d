"""
Multipliers, resolvents and sectors
===================================

A multiplier acts by a scalar on each block.  Its norm is controlled by the
variation of the scalar sequence, and resolvents of a positive multiplier are
multipliers too.
"""

import numpy as np

from rboundlab import (MultiplierSymbol, SectorGrid, build_haar_l1, inverse_resolvent_check,
                       k_theta, multiplier_norm, resolvent_symbol, sectorial_sup, var)

model = build_haar_l1(3)
rng = np.random.default_rng(2)

# %%
# The variation bound on a few random symbols.
for _ in range(5):
    sym = MultiplierSymbol.from_values(rng.standard_normal(model.n_blocks), 0.5)
    measured, _ = multiplier_norm(model, sym)
    print(f"||M_c|| = {measured:.4f}  <=  var(c) K = {var(sym) * model.K:.4f}")

# %%
# A = M_a with a_n = 2^n.  Its resolvent at lam is the multiplier with
# entries 1/(lam - a_n); the dense inverse check confirms both sides agree.
a = 2.0 ** np.arange(1, model.n_blocks + 1)
lam = -3.0 + 1.0j
print("resolvent symbol:", np.round(resolvent_symbol(a, lam).values, 4))
print("inverse residual:", inverse_resolvent_check(a, lam, model))

# %%
# Sweep the boundary of sectors of decreasing opening.  Narrow sectors come
# close to the spectrum and the bound grows.
for theta in (2.5, 1.5, 0.5, 0.1):
    grid = SectorGrid.default(theta, 80)
    print(f"theta={theta:.2f}  K_theta={k_theta(a, theta, grid):.4f}  "
          f"sup ||lam R(lam, A)|| = {sectorial_sup(model, a, theta, grid):.4f}")
