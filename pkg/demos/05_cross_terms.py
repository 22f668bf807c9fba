# # Cross terms between different offsets
#
# phi's local expectation values pick up terms <w_i|O|w_j> with i != j. The
# random pad unitaries make these small, and they shrink as the chain grows
# because more independent windows multiply together.

# %%
import numpy as np

from localmps.mps import LocalWindow
from localmps.states import random_mps
from localmps.tensor_core import random_hermitian
from localmps.verify import construction_ws, cross_term_stats

# %%
m = construction_ws(random_mps(24, 2, 8, seed=1), 4)[0].m
for n in (12, 24, 48):
    params, groups, builder = construction_ws(random_mps(n, 2, 8, seed=1), 4, m=m)
    rng = np.random.default_rng(5)
    obs = [LocalWindow(s, 1, random_hermitian(2, rng)) for s in range(0, n, 3)]
    stats = cross_term_stats(builder, obs, range(10))
    print(f"n={n:2d} M={params.M}: mean {stats.mean:.2e} +- {stats.stderr:.1e}, max {stats.max:.2e}")
