# # Bond-dimension budgets
#
# Two kinds of estimates: the exact inversion of the Renyi tail bound, and
# asymptotic laws with their unknown constants exposed as fit parameters.

# %%
import math

import numpy as np

from localmps.bounds import fit_exponent, invert_vc06, scaling_law

# %%
for eps in (1e-1, 1e-2, 1e-3):
    print(f"R_1/2 = ln 2, eps = {eps:g}: D = {invert_vc06(math.log(2), 0.5, eps)}")

# %% [markdown]
# Polynomial area-law exponents as a function of alpha.

# %%
for alpha in (0.25, 0.5, 0.75):
    print(f"alpha={alpha}: D ~ delta^-{scaling_law('thm1_area', alpha=alpha).exponent:g}")

# %% [markdown]
# Under a gap the law is sub-polynomial: ln D exceeds ln(1/delta) by a
# term growing like L^(3/4), where L = ln(1/delta).

# %%
gap_law = scaling_law("thm2_gap", gap=0.5, amplitude=1.0, log_power=1.0)
for L in (1e1, 1e3, 1e6, 1e12):
    print(f"L={L:.0e}: (ln D - L)/L = {(gap_law.log_D_at(L) - L) / L:.3g}")

# %% [markdown]
# Recovering an exponent from noisy synthetic data.

# %%
rng = np.random.default_rng(0)
xs = np.geomspace(1, 1000, 15)
ys = 2.0 * xs**4 * (1 + 0.01 * rng.standard_normal(xs.size))
print(fit_exponent(list(zip(xs, ys))))
