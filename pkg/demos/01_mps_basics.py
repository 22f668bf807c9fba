# # Matrix product states: canonical form, spectra and local reduced states
#
# A state on a chain of qudits is stored as a list of site tensors with shape
# (left bond, physical, right bond). This walkthrough builds a few states,
# brings them to canonical form and reads off Schmidt spectra and reduced
# density matrices.

# %%
import numpy as np

from localmps.mps import LocalWindow, canonicalize, dumps, inner_product, loads, reduced_density_matrix, to_dense
from localmps.states import PAULI_Z, named_state, random_mps

# %% [markdown]
# A GHZ state has bond dimension 2 everywhere and two equal Schmidt values
# at every cut.

# %%
ghz = named_state("ghz", 6)
print("bond dims:", ghz.bond_dims)
for spec in canonicalize(ghz).spectra():
    print(f"cut {spec.cut}: lambdas = {np.round(spec.lambdas, 6)}")

# %% [markdown]
# Random states saturate their bonds. Canonicalization keeps the vector
# (up to normalization) and exposes the spectrum on each bond.

# %%
psi = random_mps(10, 2, 6, seed=1)
can = canonicalize(psi)
print("form:", can.form, "bond dims:", can.bond_dims)
print("overlap with the original:", abs(inner_product(psi, can)))
print("largest Schmidt value at the middle cut:", can.spectra()[4].lambdas[0])

# %% [markdown]
# Reduced density matrices of short windows come straight from the canonical
# form. The W state has one excitation shared by three sites.

# %%
rho = reduced_density_matrix(named_state("w", 3), LocalWindow(1, 1))
print("W-state single-site RDM:\n", np.round(rho.real, 6))
print("<Z> on site 3 of GHZ:", np.trace(PAULI_Z @ reduced_density_matrix(ghz, LocalWindow(2, 1))).real)

# %% [markdown]
# The dense vector is available for small chains, and the binary MPS1
# container round-trips bit for bit.

# %%
vec = to_dense(ghz)
print("nonzero amplitudes:", np.flatnonzero(np.abs(vec) > 1e-12))
blob = dumps(psi)
print("MPS1 bytes:", len(blob), "roundtrip exact:", dumps(loads(blob)) == blob)
