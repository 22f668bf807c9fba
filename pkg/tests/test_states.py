import numpy as np
import pytest

from conftest import brute_force_dense
from localmps.errors import DomainError, ResourceError
from localmps.mps import canonicalize, to_dense
from localmps.states import (
    HamiltonianSpec,
    mps_ground_search,
    named_state,
    random_mps,
    tfim_exact_ground,
    tfim_ground_state,
    tfim_hamiltonian,
    variational_energy,
)


def test_named_states_are_normalized():
    for kind in ("product", "ghz", "w", "aklt"):
        assert named_state(kind, 6).norm() == pytest.approx(1.0)
    assert named_state("aklt", 4).d == 3


def test_ghz_and_w_amplitudes():
    ghz = brute_force_dense(named_state("ghz", 3))
    assert ghz[0] == pytest.approx(2**-0.5) and ghz[7] == pytest.approx(2**-0.5)
    w = brute_force_dense(named_state("w", 3))
    np.testing.assert_allclose(np.abs(w[[1, 2, 4]]), 3**-0.5)
    assert np.sum(np.abs(w) ** 2) == pytest.approx(1.0)


def test_named_state_errors():
    with pytest.raises(DomainError):
        named_state("ghz", 1)
    with pytest.raises(DomainError):
        named_state("cat", 4)


def test_random_mps_ranks_are_generic():
    psi = random_mps(10, 2, 4, seed=0)
    assert psi.bond_dims == [1, 2, 4, 4, 4, 4, 4, 4, 4, 2, 1]
    assert canonicalize(psi).bond_dims == psi.bond_dims
    assert psi.norm() == pytest.approx(1.0)


def test_hamiltonian_terms_are_normalized():
    ham = tfim_hamiltonian(6, 2.0)
    assert all(np.linalg.norm(t, 2) <= 1 + 1e-12 for t in ham.terms)
    with pytest.raises(DomainError):
        HamiltonianSpec(3, 2, (np.eye(4),))


def test_ed_classical_limit():
    e, psi = tfim_exact_ground(4, 0.0)
    assert e == pytest.approx(-3.0)
    vec = to_dense(psi)
    # degenerate |0000>, |1111>: the tie-break picks the lexicographically first
    assert abs(vec[0]) == pytest.approx(1.0)


def test_ed_single_site_is_plus_state():
    e, psi = tfim_exact_ground(1, 1.0)
    assert e == pytest.approx(-1.0)
    np.testing.assert_allclose(psi.tensors[0].reshape(-1), [2**-0.5, 2**-0.5], atol=1e-12)


def test_ed_matches_mpo_energy():
    e, psi = tfim_exact_ground(8, 1.3)
    assert variational_energy(psi, tfim_hamiltonian(8, 1.3)) == pytest.approx(e, abs=1e-10)


def test_ed_size_cap():
    with pytest.raises(ResourceError):
        tfim_exact_ground(20, 1.0)


def test_ground_search_is_variational_and_monotone():
    ham = tfim_hamiltonian(10, 2.0)
    e_exact, _ = tfim_exact_ground(10, 2.0)
    res = mps_ground_search(ham, D=2, sweeps=6, seed=1)
    assert all(a >= b - 1e-12 for a, b in zip(res.sweep_energies, res.sweep_energies[1:]))
    assert res.energy >= e_exact - 1e-10
    assert variational_energy(res.state, ham) == pytest.approx(res.energy, abs=1e-9)


def test_ground_search_reaches_exact_energy():
    e_exact, _ = tfim_exact_ground(10, 2.0)
    res = mps_ground_search(tfim_hamiltonian(10, 2.0), D=8, sweeps=10, seed=0)
    assert res.energy == pytest.approx(e_exact, abs=1e-6)
    assert res.converged


def test_tfim_ground_state_dispatch():
    e_small, _ = tfim_ground_state(6, 1.0)
    assert e_small == pytest.approx(tfim_exact_ground(6, 1.0)[0])
    e_var, psi = tfim_ground_state(6, 1.0, D=8)
    assert e_var == pytest.approx(e_small, abs=1e-8)
