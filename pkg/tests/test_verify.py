import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_dense, dense_rdm, dense_trace_distance
from localmps.construction import build_truncated_u
from localmps.errors import DomainError
from localmps.metrics import max_local_error, trace_distance
from localmps.mps import LocalWindow, canonicalize, product_state, reduced_density_matrix
from localmps.states import named_state, random_mps
from localmps.tensor_core import random_hermitian
from localmps.verify import (
    construction_ws,
    cross_term_stats,
    cross_terms,
    envelope_constant,
    error_curve,
    lemma4_check,
    optimal_observable,
    sweep,
    window_equality_check,
)


def test_identical_states_have_zero_error():
    psi = random_mps(8, 2, 3, seed=0)
    assert max_local_error(psi, psi, 2)[0] < 1e-10


def test_orthogonal_product_states():
    a = product_state([0] * 5, d=2)
    b = product_state([1] * 5, d=2)
    err, per = max_local_error(a, b, 1)
    assert err == pytest.approx(2.0)
    assert len(per) == 5


def test_local_errors_match_dense_oracle():
    a, b = random_mps(10, 2, 4, seed=1), random_mps(10, 2, 4, seed=2)
    va, vb = brute_force_dense(a), brute_force_dense(b)
    _, per = max_local_error(a, b, 2)
    for start, _, err in per:
        ref = dense_trace_distance(dense_rdm(va, 10, 2, start, 2), dense_rdm(vb, 10, 2, start, 2))
        assert err == pytest.approx(ref, abs=1e-9)


def test_trace_distance_duality(rng):
    a, b = random_mps(6, 2, 4, seed=1), random_mps(6, 2, 4, seed=2)
    win = LocalWindow(2, 2)
    rho, sigma = reduced_density_matrix(a, win), reduced_density_matrix(b, win)
    dist = trace_distance(rho, sigma)
    obs = optimal_observable(rho, sigma)
    assert np.linalg.norm(obs, 2) <= 1 + 1e-12
    assert np.real(np.trace(obs @ (rho - sigma))) == pytest.approx(dist, abs=1e-8)
    for _ in range(200):
        o = random_hermitian(4, rng, norm=rng.uniform(0, 1))
        assert abs(np.trace(o @ (rho - sigma))) <= dist + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(1, 4), st.integers(0, 10**6))
def test_local_error_is_at_most_two(n, D, seed):
    a, b = random_mps(n, 2, D, seed), random_mps(n, 2, D, seed + 1)
    assert max_local_error(a, b, 1)[0] <= 2 + 1e-12


def test_lemma4_exact_budget():
    chk = lemma4_check(random_mps(8, 2, 4, seed=0), 4, 2, 3)
    assert chk.lhs == pytest.approx(0.0, abs=1e-12) and chk.holds


def test_lemma4_ghz_example():
    chk = lemma4_check(named_state("ghz", 6), 1, 2, 2)
    assert chk.middle == pytest.approx(3.0)
    assert chk.rhs == pytest.approx(3.0)
    assert chk.lhs == pytest.approx(0.5, abs=1e-12)
    assert chk.holds


@pytest.mark.parametrize("seed", range(10))
def test_lemma4_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 12))
    chk = lemma4_check(random_mps(n, 2, 6, seed), int(rng.integers(1, 5)), int(rng.integers(-2, n)), int(rng.integers(1, 5)))
    assert chk.holds


def _setup(n=14, D_prime=2, seed=3):
    psi = canonicalize(random_mps(n, 2, 4, seed=seed))
    params, groups, builder = construction_ws(psi, D_prime)
    return psi, params, groups, builder


def test_window_equality_holds_on_inner_windows():
    psi, params, groups, builder = _setup()
    ws = builder(17)
    checked = 0
    for g, w in zip(groups, ws):
        for win in g.windows:
            if win.inner is None:
                continue
            u = build_truncated_u(psi, win.s, params)
            lo, hi = win.inner
            width = min(2, hi - lo + 1)
            assert window_equality_check(w, u, LocalWindow(lo - 1, width), trials=20) < 1e-10
            checked += 1
    assert checked > 0


def test_window_equality_negative_control():
    psi, params, groups, builder = _setup()
    ws = builder(17)
    worst = 0.0
    for g, w in zip(groups, ws):
        for win in g.windows:
            if win.left_pad is None or win.inner is None or win.left_pad[1] - win.left_pad[0] + 1 < params.b:
                continue
            u = build_truncated_u(psi, win.s, params)
            # straddles the left pad and the first inner site
            start = win.left_pad[1] - 1
            worst = max(worst, window_equality_check(w, u, LocalWindow(start, 2), trials=20))
    assert worst > 1e-3


def test_cross_terms_match_dense_oracle():
    psi, params, groups, builder = _setup(n=10)
    rng = np.random.default_rng(0)
    obs = [LocalWindow(3, 1, random_hermitian(2, rng)), LocalWindow(6, 2, random_hermitian(4, rng))]
    for seed in (None, 5):
        ws = builder(seed)
        got = cross_terms(ws, obs)
        vecs = [brute_force_dense(w) for w in ws]
        vecs = [v / np.linalg.norm(v) for v in vecs]
        for row, o in zip(got, obs):
            full = np.kron(np.kron(np.eye(2**o.start), o.observable), np.eye(2 ** (10 - o.stop)))
            ref = [abs(np.vdot(vi, full @ vj)) for i, vi in enumerate(vecs) for j, vj in enumerate(vecs) if i != j]
            np.testing.assert_allclose(row, ref, atol=1e-10)


def test_cross_terms_need_two_states():
    with pytest.raises(DomainError):
        cross_terms([named_state("ghz", 3)], [])


def test_cross_term_stats_summary():
    _, _, _, builder = _setup(n=10)
    obs = [LocalWindow(4, 1, np.diag([1.0, -1.0]))]
    summary = cross_term_stats(builder, obs, [0, 1, 2])
    assert len(summary.per_seed_mean) == 3
    assert summary.max >= summary.mean >= 0
    assert summary.stderr >= 0


def test_error_curve_and_envelope():
    assert error_curve(1e-3, 1) == 0.0
    assert error_curve(0.001, np.e) == pytest.approx(0.1)
    assert envelope_constant([(0.1, 0.2), (0.2, 0.1), (0.0, 5.0)]) == pytest.approx(2.0)
    assert envelope_constant([]) is None


def test_sweep_product_state():
    res = sweep(named_state("product", 6), [1, 2, 4])
    assert all(e < 1e-8 for e in res.errors())
    assert res.to_csv().splitlines()[0] == "d_prime,epsilon,bond_dim,max_error,seed,accepted"


def test_sweep_ghz():
    res = sweep(named_state("ghz", 8), [1, 2])
    assert res.errors()[1] < 1e-8
    assert res.errors()[0] > 0.1


def test_sweep_flags_failed_points():
    res = sweep(named_state("ghz", 6), [2, 0])
    assert not res.rows[1]["accepted"] and "failure" in res.rows[1]
    with pytest.raises(DomainError):
        sweep(named_state("ghz", 6), [])
