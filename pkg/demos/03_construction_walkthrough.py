# # Building phi step by step
#
# The approximation is a superposition of M states w_i. Each w_i is a tensor
# product of short windows: inside a window the truncated state u_s is kept
# exactly, and the environment on each side is squeezed into b pad sites that
# carry a Schmidt label. Random unitaries on the left pads make different
# offsets nearly orthogonal.

# %%
import numpy as np

from localmps.construction import (
    assemble_phi,
    build_truncated_u,
    build_ws,
    construct,
    offset_groups,
    select_params,
)
from localmps.entanglement import truncation_profile
from localmps.metrics import max_local_error
from localmps.mps import canonicalize, inner_product
from localmps.states import random_mps

# %%
psi = canonicalize(random_mps(16, 2, 8, seed=2))
D_prime = 2
eps = truncation_profile(psi, D_prime).epsilon
params = select_params(D_prime, eps, psi.d, psi.n)
print(f"epsilon={eps:.3e}  b={params.b}  m={params.m}  M={params.M}")

# %% [markdown]
# Truncating the bonds of one window costs little norm; the inner lemma
# bounds the loss by twice the discarded weight.

# %%
u = build_truncated_u(psi, 3, params)
loss = 1 + u.norm() ** 2 - 2 * inner_product(psi, u.state).real
print(f"||psi - u||^2 = {loss:.3e}  (cuts {u.cuts})")

# %% [markdown]
# Windows for every offset. Offsets whose single window covers the whole
# chain carry no pad and are merged into one term.

# %%
groups = offset_groups(psi, params)
for g in groups[:4]:
    print(f"offset {g.offset:3d} x{g.multiplicity}:", [w.site_range for w in g.windows])

ws = build_ws(groups, params, seed=5)
phi = assemble_phi(ws, [g.multiplicity for g in groups])
print("phi bond dims:", phi.bond_dims)
print("max single-site error:", max_local_error(psi, phi, 1)[0])

# %% [markdown]
# `construct` runs the whole pipeline, retries the unitaries if the error is
# above a threshold, and reports what it did. With epsilon this large the
# recipe picks a short window, pads take up a big share of every window and
# no retry gets under the default threshold.

# %%
phi, rep = construct(psi, D_prime, seed=5)
print(f"error {rep.max_local_error:.3f} after {rep.attempts} attempts (threshold {rep.threshold}), accepted={rep.accepted}")
print("errors per attempt:", np.round(rep.attempt_errors, 3))
print(f"bond {rep.bond_dim_phi} (budget M*D'*d = {rep.M * D_prime * psi.d})")

# %% [markdown]
# A larger budget lowers epsilon, lengthens the windows and the error drops.

# %%
for dp in (2, 4, 8):
    _, rep = construct(psi, dp, seed=5, retry_budget=2)
    print(f"D'={dp}: epsilon={rep.epsilon:.2e} m={rep.m} error={rep.max_local_error:.3e}")
