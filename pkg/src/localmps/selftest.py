"""Fast invariant suites behind ``localmps selftest``."""

from __future__ import annotations

import numpy as np

from . import bounds, entanglement
from .construction import build_truncated_u, construct, offset_groups, randomize_w, select_params
from .mps import LocalWindow, canonical_residuals, canonicalize, reduced_density_matrix
from .states import named_state, random_mps
from .verify import lemma4_check, window_equality_check


def _tail_bound_suite() -> bool:
    rng = np.random.default_rng(11)
    for _ in range(200):
        lam = entanglement.random_spectrum(rng)
        alpha = float(rng.uniform(0.02, 0.98))
        D = int(rng.integers(1, 70))
        if not entanglement.renyi_tail_bound(lam, alpha, D).holds:
            return False
    return True


def _inner_lemma_suite() -> bool:
    rng = np.random.default_rng(12)
    for case in range(20):
        n = int(rng.integers(4, 11))
        psi = random_mps(n, 2, int(rng.integers(2, 7)), seed=case)
        m = int(rng.integers(1, n))
        if not lemma4_check(psi, int(rng.integers(1, 5)), int(rng.integers(1 - m, n)), m).holds:
            return False
    return True


def _window_suite() -> bool:
    psi = canonicalize(random_mps(12, 2, 6, seed=5))
    params = select_params(2, 0.05, 2, 12)
    for group in offset_groups(psi, params):
        w = randomize_w(group.offset, group.windows, params, seed=3)
        for win in group.windows:
            if win.inner is None:
                continue
            u = build_truncated_u(psi, win.s, params)
            lo, hi = win.inner
            width = min(hi - lo + 1, 3)
            if window_equality_check(w, u, LocalWindow(lo - 1, width), trials=10) > 1e-10:
                return False
    return True


def _exact_suite() -> bool:
    for psi, dp in ((named_state("product", 6), 1), (named_state("ghz", 6), 2)):
        _, rep = construct(psi, dp, seed=1)
        if rep.max_local_error >= 1e-8:
            return False
    return True


def _canonical_suite() -> bool:
    can = canonicalize(random_mps(9, 2, 5, seed=2))
    iso, sch = canonical_residuals(can)
    rho = reduced_density_matrix(named_state("ghz", 5), LocalWindow(2, 1))
    return max(iso, sch) < 1e-10 and np.allclose(rho, np.eye(2) / 2, atol=1e-12)


def _planner_suite() -> bool:
    if bounds.invert_vc06(np.log(2), 0.5, 0.01) != 200:
        return False
    return all(
        abs(bounds.scaling_law("thm1_area", alpha=a).exponent - e) < 1e-12 for a, e in ((0.25, 2), (0.5, 4), (0.75, 10))
    )


SUITES = (
    ("canonical form identities", _canonical_suite),
    ("Renyi tail bound", _tail_bound_suite),
    ("truncation norm inequality", _inner_lemma_suite),
    ("window expectation equality", _window_suite),
    ("exact-case construction", _exact_suite),
    ("planner", _planner_suite),
)


def run_selftest(verbose: bool = False) -> bool:
    ok = True
    for name, fn in SUITES:
        passed = bool(fn())
        ok &= passed
        if verbose:
            print(f"[{'PASS' if passed else 'FAIL'}] {name}")
    return ok
