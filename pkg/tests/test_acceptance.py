"""End-to-end acceptance checks, one test per criterion, each reporting a PASS/FAIL line."""

import csv
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import brute_force_dense, dense_rdm, dense_schmidt, record_criterion
from localmps.bounds import fit_exponent, invert_vc06, scaling_law, tail_bound_value
from localmps.construction import ConstructionParams, build_truncated_u, construct, select_params
from localmps.entanglement import random_spectrum, renyi_tail_bound, truncation_profile
from localmps.mps import LocalWindow, canonicalize, inner_product, reduced_density_matrix
from localmps.states import mps_ground_search, named_state, random_mps, tfim_exact_ground, tfim_hamiltonian
from localmps.tensor_core import random_hermitian
from localmps.verify import (
    construction_ws,
    cross_term_stats,
    envelope_constant,
    error_curve,
    lemma4_check,
    sweep,
    window_equality_check,
)


def test_criterion_1_renyi_tail_bound():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    failures = 0
    for _ in range(1000):
        lam = random_spectrum(rng, max_len=64)
        alpha = float(rng.uniform(0.01, 0.99))
        D = int(rng.integers(1, 65))
        if not renyi_tail_bound(lam, alpha, D).holds:
            failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 10
    assert record_criterion(1, ok, f"{failures} violations in 1000 spectra, {elapsed:.2f}s")


def test_criterion_2_inner_lemma():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    bad, dense_checked, worst_dense = 0, 0, 0.0
    for case in range(200):
        n = int(rng.integers(3, 17))
        D = int(rng.integers(1, 9))
        psi = random_mps(n, 2, D, seed=case)
        dp = int(rng.integers(1, 6))
        m = int(rng.integers(1, 9))
        offset = int(rng.integers(1 - m, n))
        chk = lemma4_check(psi, dp, offset, m)
        bad += not chk.holds
        if n <= 12:
            can = canonicalize(psi)
            b = select_params(dp, 0.0, 2, n).b
            u = build_truncated_u(can, offset, ConstructionParams(dp, b, m, 2, n))
            diff = brute_force_dense(can) - brute_force_dense(u.state)
            worst_dense = max(worst_dense, abs(np.linalg.norm(diff) ** 2 - chk.lhs))
            dense_checked += 1
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and worst_dense < 1e-9 and elapsed < 120
    detail = f"{bad} violations in 200 cases, dense lhs gap {worst_dense:.1e} over {dense_checked} cases, {elapsed:.1f}s"
    assert record_criterion(2, ok, detail)


def test_criterion_3_window_equality():
    t0 = time.perf_counter()
    psi = canonicalize(random_mps(24, 2, 8, seed=3))
    params, groups, builder = construction_ws(psi, 4)
    ws = builder(11)
    worst, windows = 0.0, 0
    for g, w in zip(groups, ws):
        for win in g.windows:
            if win.inner is None:
                continue
            u = build_truncated_u(psi, win.s, params)
            lo, hi = win.inner
            width = min(hi - lo + 1, 4)
            for start in range(lo, hi - width + 2):
                dev = window_equality_check(w, u, LocalWindow(start - 1, width), trials=50, seed=start)
                worst = max(worst, dev)
                windows += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and windows > 0 and elapsed < 120
    detail = f"max deviation {worst:.1e} over {windows} windows in {len(groups)} distinct offsets (M={params.M}), {elapsed:.1f}s"
    assert record_criterion(3, ok, detail)


def test_criterion_4_exact_cases():
    t0 = time.perf_counter()
    cases = [("product", dp) for dp in (1, 2, 3, 4)] + [("ghz", 2)]
    worst, bond_ok, shortcut = 0.0, True, True
    for kind, dp in cases:
        _, rep = construct(named_state(kind, 10), dp, seed=4)
        worst = max(worst, rep.max_local_error)
        bond_ok &= rep.bond_dim_phi <= rep.M * dp * 2
        shortcut &= rep.exact_shortcut
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and bond_ok and elapsed < 10
    note = "psi returned since eps=0" if shortcut else "window pipeline"
    assert record_criterion(4, ok, f"max error {worst:.1e}, bond bound {'met' if bond_ok else 'violated'}, {note}, {elapsed:.2f}s")


@pytest.mark.slow
def test_criterion_5_gapped_chain_sweep():
    t0 = time.perf_counter()
    e_ed, psi_ed = tfim_exact_ground(12, 2.0)
    small = mps_ground_search(tfim_hamiltonian(12, 2.0), D=16, sweeps=12, seed=0)
    fidelity = abs(inner_product(canonicalize(psi_ed), canonicalize(small.state)))
    energy_gap = abs(small.energy - e_ed)

    psi = mps_ground_search(tfim_hamiltonian(32, 2.0), D=24, sweeps=12, seed=0).state
    res = sweep(psi, [2, 4, 8, 16], widths=(1, 2), seed=7)
    errs = res.errors()
    eps = [r["epsilon"] for r in res.rows]
    curve = [error_curve(e, dp) for e, dp in zip(eps, (2, 4, 8, 16))]
    monotone = all(a >= b for a, b in zip(errs, errs[1:]))
    C = res.curve_constant
    bounded = all(e <= C * c * (1 + 1e-12) for e, c in zip(errs, curve))
    # stricter variant: C fitted on the two coarsest points only
    C_head = envelope_constant(list(zip(curve[:2], errs[:2])))
    holdout = all(e <= C_head * c for e, c in zip(errs, curve))
    ms = [rep.m for rep in res.reports]
    # informational: the same points with m held below the chain length
    capped = [construct(psi, dp, seed=7, widths=(1, 2), m_cap=31, retry_budget=0)[1].max_local_error for dp in (2, 4, 8, 16)]
    elapsed = time.perf_counter() - t0
    ok = energy_gap < 1e-6 and monotone and bounded and holdout and elapsed < 900
    detail = (
        f"ED check dE={energy_gap:.1e} fidelity={fidelity:.10f}; m={ms}; errors {['%.2e' % e for e in errs]}; "
        f"C={C:.3g} bounds all points, head-fitted C={C_head:.3g} {'bounds' if holdout else 'misses'} the rest; "
        f"with m<=31 errors would be {['%.2f' % e for e in capped]}; {elapsed:.1f}s"
    )
    assert record_criterion(5, ok, detail)


@pytest.mark.slow
def test_criterion_6_cross_term_trend():
    t0 = time.perf_counter()
    m = construction_ws(random_mps(24, 2, 8, seed=1), 4)[0].m
    stats = {}
    for n in (24, 48):
        _, _, builder = construction_ws(random_mps(n, 2, 8, seed=1), 4, m=m)
        rng = np.random.default_rng(5)
        obs = [LocalWindow(s, 1, random_hermitian(2, rng)) for s in range(0, n, 3)]
        stats[n] = cross_term_stats(builder, obs, range(20))
    a, b = stats[24], stats[48]
    margin = 3 * math.hypot(a.stderr, b.stderr)
    elapsed = time.perf_counter() - t0
    ok = b.mean < a.mean - margin and elapsed < 900
    detail = f"m={m}: mean {a.mean:.2e} (n=24) vs {b.mean:.2e} (n=48), 3-SE margin {margin:.1e}, {elapsed:.1f}s"
    assert record_criterion(6, ok, detail)


def test_criterion_7_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = {"inner": 0.0, "rdm": 0.0, "schmidt": 0.0, "tail": 0.0}
    for case in range(100):
        d = int(rng.choice([2, 3]))
        n = int(rng.integers(2, 13 if d == 2 else 8))
        D = int(rng.integers(1, 9))
        a, b = random_mps(n, d, D, seed=2 * case), random_mps(n, d, D, seed=2 * case + 1)
        va, vb = brute_force_dense(a), brute_force_dense(b)
        worst["inner"] = max(worst["inner"], abs(inner_product(a, b) - np.vdot(va, vb)))
        width = int(rng.integers(1, min(3, n) + 1))
        start = int(rng.integers(0, n - width + 1))
        rho = reduced_density_matrix(a, LocalWindow(start, width))
        worst["rdm"] = max(worst["rdm"], np.max(np.abs(rho - dense_rdm(va, n, d, start, width))))
        dp = int(rng.integers(1, 6))
        tails = truncation_profile(a, dp)
        for spec in canonicalize(a).spectra():
            ref = dense_schmidt(va, n, d, spec.cut)
            worst["schmidt"] = max(worst["schmidt"], np.max(np.abs(spec.lambdas - ref[: spec.rank])), float(np.sqrt(np.sum(ref[spec.rank :] ** 2))))
            worst["tail"] = max(worst["tail"], abs(tails.tail(spec.cut) - np.sum(ref[dp:] ** 2)))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-9 and elapsed < 120
    assert record_criterion(7, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {elapsed:.1f}s")


def _bisect_oracle(R, alpha, eps):
    """Smallest D with bound(D) <= eps(1+1e-12), by integer bisection on the monotone bound."""

    def good(D):
        return tail_bound_value(R, alpha, D) <= eps * (1 + 1e-12)

    hi = 1
    while not good(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if good(mid) else (mid, hi)
    return hi if lo == 0 or not good(lo) else lo


def test_criterion_8_planner():
    t0 = time.perf_counter()
    mismatches = 0
    for R in np.linspace(0.0, 3.0, 10):
        for alpha in np.linspace(0.1, 0.6, 10):
            for eps in np.geomspace(1e-3, 1.0, 10):
                D = invert_vc06(float(R), float(alpha), float(eps))
                minimal = tail_bound_value(R, alpha, D) <= eps * (1 + 1e-12) and (D == 1 or tail_bound_value(R, alpha, D - 1) > eps * (1 + 1e-12))
                mismatches += not minimal or D != _bisect_oracle(R, alpha, eps)
    exps = [scaling_law("thm1_area", alpha=a).exponent for a in (0.25, 0.5, 0.75)]
    exact = exps == [2.0, 4.0, 10.0]
    rng = np.random.default_rng(8)
    xs = np.geomspace(1, 1000, 20)
    fit_err = 0.0
    for true in (0.5, 2.0, 4.0, 10.0):
        ys = 3.0 * xs**true * (1 + 0.01 * rng.standard_normal(xs.size))
        fit_err = max(fit_err, abs(fit_exponent(list(zip(xs, ys))).slope / true - 1))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and exact and fit_err < 0.05 and elapsed < 5
    detail = f"{mismatches} non-minimal inversions on 1000 grid points, exponents {exps}, worst fit error {100 * fit_err:.2f}%, {elapsed:.2f}s"
    assert record_criterion(8, ok, detail)


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "localmps.cli", *args], capture_output=True, text=True)


def _strip_metadata(path):
    doc = json.loads(path.read_text())
    doc.pop("metadata")
    return json.dumps(doc, sort_keys=True)


def test_criterion_9_determinism(tmp_path):
    outs = []
    for run in range(2):
        d = tmp_path / f"run{run}"
        d.mkdir()
        _cli("construct", "--state", "random:n=12,d=2,D=4,seed=9", "--dprime", "2", "--seed", "7", "--out", str(d / "c.json"), "--phi-out", str(d / "phi.mps"))
        _cli("sweep", "--state", "tfim:n=16,h=2,method=dmrg,D=8", "--dprime", "2,4", "--seed", "7", "--out", str(d / "s.csv"), "--json-out", str(d / "s.json"))
        outs.append(d)
    a, b = outs
    same = (
        _strip_metadata(a / "c.json") == _strip_metadata(b / "c.json")
        and _strip_metadata(a / "s.json") == _strip_metadata(b / "s.json")
        and (a / "s.csv").read_bytes() == (b / "s.csv").read_bytes()
        and (a / "phi.mps").read_bytes() == (b / "phi.mps").read_bytes()
    )
    # the timestamp is the only field allowed to differ
    raw_a = json.loads((a / "c.json").read_text())
    isolated = set(raw_a["metadata"]) == {"timestamp"} and "timestamp" not in json.dumps({k: v for k, v in raw_a.items() if k != "metadata"})
    with open(a / "s.csv") as fh:
        rows = list(csv.DictReader(fh))
    ok = same and isolated and len(rows) == 2
    assert record_criterion(9, ok, f"reports {'byte-identical' if same else 'differ'} outside the metadata block")
