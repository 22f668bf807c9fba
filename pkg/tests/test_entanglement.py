import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_dense, dense_schmidt
from localmps.entanglement import (
    entropy,
    entropy_profile,
    random_spectrum,
    renyi_tail_bound,
    tail_weight,
    truncation_profile,
)
from localmps.errors import DomainError
from localmps.states import named_state, random_mps


def test_von_neumann_of_bell_pair():
    assert entropy(np.array([2**-0.5, 2**-0.5]), 1) == pytest.approx(np.log(2), abs=1e-12)
    assert entropy(np.array([2**-0.5, 2**-0.5]), 1) == pytest.approx(0.693147, abs=1e-6)


def test_renyi_half():
    lam = np.sqrt([0.8, 0.2])
    expected = 2 * np.log(np.sqrt(0.8) + np.sqrt(0.2))
    assert entropy(lam, 0.5) == pytest.approx(expected, abs=1e-14)
    assert entropy(lam, 0.5) == pytest.approx(0.587787, abs=1e-6)


def test_entropy_rejects_nonpositive_alpha():
    with pytest.raises(DomainError):
        entropy(np.array([1.0]), 0.0)


def test_ghz_profiles():
    psi = named_state("ghz", 5)
    assert entropy_profile(psi, 1).max_entropy == pytest.approx(np.log(2))
    prof = truncation_profile(psi, 1)
    assert [c for c, _ in prof.per_cut_tail] == [1, 2, 3, 4]
    np.testing.assert_allclose([t for _, t in prof.per_cut_tail], 0.5, atol=1e-12)
    assert truncation_profile(psi, 2).epsilon == pytest.approx(0.0, abs=1e-14)
    assert prof.to_csv().splitlines()[0] == "cut,tail"


@pytest.mark.parametrize("D", [1, 2, 3, 5])
def test_tails_match_dense_svd(D):
    psi = random_mps(9, 2, 6, seed=D)
    vec = brute_force_dense(psi)
    prof = truncation_profile(psi, D)
    for cut, tail in prof.per_cut_tail:
        s = dense_schmidt(vec, 9, 2, cut)
        assert tail == pytest.approx(np.sum(s[D:] ** 2), abs=1e-10)


def test_truncation_profile_rejects_zero_budget():
    with pytest.raises(DomainError):
        truncation_profile(named_state("ghz", 3), 0)


def test_vc06_example():
    chk = renyi_tail_bound(np.sqrt([0.8, 0.2]), 0.5, 1)
    assert chk.tail == pytest.approx(0.2)
    assert chk.bound == pytest.approx(1.8, abs=1e-12)
    assert chk.holds


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.01, 0.99), st.integers(1, 70))
def test_vc06_property(seed, alpha, D):
    lam = random_spectrum(np.random.default_rng(seed))
    assert renyi_tail_bound(lam, alpha, D).holds


def test_tail_weight_is_sorted_internally():
    assert tail_weight(np.sqrt([0.1, 0.9]), 1) == pytest.approx(0.1)


def test_random_spectrum_is_normalized(rng):
    for _ in range(50):
        lam = random_spectrum(rng)
        assert np.sum(lam**2) == pytest.approx(1.0)
        assert lam.size <= 64
        assert np.all(np.diff(lam) <= 0)
