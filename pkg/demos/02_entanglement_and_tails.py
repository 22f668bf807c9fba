# # Renyi entropies and the tail bound
#
# The discarded weight beyond the D largest Schmidt values is controlled by a
# Renyi entropy with alpha < 1. This script evaluates both sides on a few
# spectra and on a random MPS.

# %%
import numpy as np

from localmps.entanglement import entropy, entropy_profile, random_spectrum, renyi_tail_bound, truncation_profile
from localmps.states import random_mps

# %%
lam = np.sqrt([0.8, 0.2])
print("von Neumann:", entropy(lam, 1.0))
print("Renyi 1/2  :", entropy(lam, 0.5))
chk = renyi_tail_bound(lam, 0.5, 1)
print(f"tail beyond D=1: {chk.tail:.3f}  bound: {chk.bound:.3f}  holds: {chk.holds}")

# %% [markdown]
# The bound is loose for flat spectra and tight-ish for steep ones.

# %%
rng = np.random.default_rng(0)
for _ in range(5):
    lam = random_spectrum(rng)
    for alpha in (0.25, 0.5, 0.75):
        c = renyi_tail_bound(lam, alpha, 4)
        print(f"len {lam.size:2d} alpha {alpha}: tail {c.tail:.2e} <= bound {c.bound:.2e}")

# %% [markdown]
# Per-cut profiles of a random MPS. The truncation error epsilon is the worst
# cut's discarded weight.

# %%
psi = random_mps(12, 2, 8, seed=3)
print(entropy_profile(psi, 0.5).to_csv())
for dp in (1, 2, 4, 8):
    print(f"D'={dp}: epsilon = {truncation_profile(psi, dp).epsilon:.3e}")
