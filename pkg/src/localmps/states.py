"""Test states: named analytic states, random MPS and transverse-field Ising ground states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, ResourceError
from .mps import Mps, canonicalize, from_dense, inner_product
from .tensor_core import DTYPE, TOL_EXACT

PAULI_X = np.array([[0, 1], [1, 0]], dtype=DTYPE)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=DTYPE)
IDENTITY_2 = np.eye(2, dtype=DTYPE)

#: Largest chain handled by exact diagonalization.
ED_MAX_SITES = 14
#: Above this size the exact solver switches from dense to Lanczos.
ED_DENSE_MAX_SITES = 10


# -- named states -------------------------------------------------------------

def _normalize_first(tensors: list) -> Mps:
    state = Mps(tuple(tensors))
    return state.scaled(1.0 / state.norm())


def named_state(kind: str, n: int) -> Mps:
    """Exact normalized MPS of a named state with minimal bond dimension.

    ``kind`` is one of ``product`` (``|0...0>``), ``ghz``, ``w`` or ``aklt``
    (spin-1, ``d = 3``, with fixed boundary vectors).
    """
    if n < 2:
        raise DomainError(f"named states need n >= 2, got {n}")
    if kind == "product":
        t = np.zeros((1, 2, 1), dtype=DTYPE)
        t[0, 0, 0] = 1.0
        return Mps(tuple(t for _ in range(n)))
    if kind == "ghz":
        bulk = np.zeros((2, 2, 2), dtype=DTYPE)
        bulk[0, 0, 0] = bulk[1, 1, 1] = 1.0
        first = np.zeros((1, 2, 2), dtype=DTYPE)
        first[0, 0, 0] = first[0, 1, 1] = 1.0
        last = np.zeros((2, 2, 1), dtype=DTYPE)
        last[0, 0, 0] = last[1, 1, 0] = 1.0
        return _normalize_first([first] + [bulk] * (n - 2) + [last])
    if kind == "w":
        # bond 0: no excitation yet, bond 1: excitation already placed
        bulk = np.zeros((2, 2, 2), dtype=DTYPE)
        bulk[0, 0, 0] = bulk[1, 0, 1] = bulk[0, 1, 1] = 1.0
        return _normalize_first([bulk[:1]] + [bulk] * (n - 2) + [bulk[:, :, 1:]])
    if kind == "aklt":
        sp_ = np.array([[0, 1], [0, 0]], dtype=DTYPE)
        sz = np.array([[1, 0], [0, -1]], dtype=DTYPE)
        mats = [np.sqrt(2 / 3) * sp_, -np.sqrt(1 / 3) * sz, -np.sqrt(2 / 3) * sp_.T]
        bulk = np.stack(mats, axis=1)
        return _normalize_first([bulk[:1]] + [bulk] * (n - 2) + [bulk[:, :, :1]])
    raise DomainError(f"unknown named state {kind!r}")


def random_mps(n: int, d: int, D: int, seed: int) -> Mps:
    """Normalized complex Gaussian MPS with bonds ``min(D, d**i, d**(n-i))``."""
    if D < 1:
        raise DomainError(f"D must be >= 1, got {D}")
    rng = np.random.default_rng(seed)
    bonds = [min(D, d**i, d ** (n - i)) for i in range(n + 1)]
    ts = []
    for i in range(n):
        shape = (bonds[i], d, bonds[i + 1])
        ts.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return _normalize_first(ts)


# -- Hamiltonians -------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonianSpec:
    """Nearest-neighbour Hamiltonian ``scale * sum_i H_i`` with ``||H_i|| <= 1``.

    ``terms[i]`` acts on sites ``i, i+1`` (0-based) as a ``d**2`` square matrix.
    """

    n: int
    d: int
    terms: tuple
    scale: float = 1.0
    model: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.terms) != max(self.n - 1, 0):
            raise DomainError("need exactly n-1 nearest-neighbour terms")
        for t in self.terms:
            if np.max(np.abs(t - t.conj().T)) > TOL_EXACT:
                raise DomainError("Hamiltonian term is not Hermitian")
            if np.linalg.norm(t, 2) > 1 + TOL_EXACT:
                raise DomainError("Hamiltonian term has norm above 1")


def tfim_hamiltonian(n: int, h: float) -> HamiltonianSpec:
    """``H = -sum Z_i Z_{i+1} - h sum X_i`` on an open chain, terms rescaled to norm <= 1.

    Each site's field is shared equally between the bonds touching it.
    """
    if n < 2:
        raise DomainError("a two-site decomposition needs n >= 2")
    if h < 0:
        raise DomainError(f"h must be non-negative, got {h}")
    raw = []
    for i in range(n - 1):
        wl = 1.0 if i == 0 else 0.5
        wr = 1.0 if i == n - 2 else 0.5
        term = -np.kron(PAULI_Z, PAULI_Z) - h * (wl * np.kron(PAULI_X, IDENTITY_2) + wr * np.kron(IDENTITY_2, PAULI_X))
        raw.append(term)
    scale = max(np.linalg.norm(t, 2) for t in raw)
    terms = tuple(t / scale for t in raw)
    return HamiltonianSpec(n, 2, terms, float(scale), "tfim", {"h": float(h)})


def _tfim_sparse(n: int, h: float) -> sp.csr_matrix:
    dim = 2**n
    idx = np.arange(dim)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    spins = 1 - 2 * bits
    diag = -np.sum(spins[:, :-1] * spins[:, 1:], axis=1).astype(float)
    rows = [idx]
    cols = [idx]
    vals = [diag]
    for j in range(n):
        rows.append(idx)
        cols.append(idx ^ (1 << (n - 1 - j)))
        vals.append(np.full(dim, -h))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))


def _tie_break(space: np.ndarray) -> np.ndarray:
    """Deterministic representative of a (possibly degenerate) eigenspace.

    Projects the lexicographically first computational basis state with
    non-zero overlap onto the space, then fixes the global phase so the first
    non-negligible amplitude is real positive.
    """
    q, _ = np.linalg.qr(space)
    weights = np.sum(np.abs(q) ** 2, axis=1)
    first = int(np.argmax(weights > 1e-8))
    vec = q @ q[first].conj()
    vec = vec / np.linalg.norm(vec)
    pivot = vec[int(np.argmax(np.abs(vec) > 1e-8))]
    return vec * (abs(pivot) / pivot)


def tfim_exact_ground(n: int, h: float, degeneracy_tol: float = 1e-9) -> tuple[float, Mps]:
    """Ground energy and state of ``-sum ZZ - h sum X`` by exact diagonalization.

    Dense ``eigh`` up to ``ED_DENSE_MAX_SITES`` sites, Lanczos beyond. Degenerate
    ground spaces are resolved by :func:`_tie_break`.
    """
    if n > ED_MAX_SITES:
        raise ResourceError(f"exact diagonalization is capped at {ED_MAX_SITES} sites")
    if n < 1:
        raise DomainError("n must be >= 1")
    ham = _tfim_sparse(n, h)
    if n <= ED_DENSE_MAX_SITES:
        evals, evecs = np.linalg.eigh(ham.toarray())
    else:
        evals, evecs = spla.eigsh(ham, k=4, which="SA", tol=1e-14, v0=np.ones(2**n))
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    e0 = float(evals[0])
    space = evecs[:, np.abs(evals - e0) < degeneracy_tol]
    vec = _tie_break(space.astype(DTYPE))
    state = Mps((vec.reshape(1, 2, 1),)) if n == 1 else from_dense(vec, n, 2)
    return e0, Mps(state.tensors)


# -- variational ground-state search -----------------------------------------

def nearest_neighbour_mpo(ham: HamiltonianSpec) -> list:
    """MPO tensors ``(w_left, d_out, d_in, w_right)`` of ``sum_i H_i`` (unscaled terms).

    Bond index 0 means "no term started", the last index "term finished",
    and the indices in between carry an operator-Schmidt component of the
    current bond's term.
    """
    d, n = ham.d, ham.n
    splits = []
    for t in ham.terms:
        mat = t.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
        u, s, vh = np.linalg.svd(mat)
        r = max(int(np.count_nonzero(s > 1e-14 * s[0])), 1)
        left = (u[:, :r] * s[:r]).T.reshape(r, d, d)
        right = vh[:r].reshape(r, d, d)
        splits.append((left, right))
    rmax = max((left.shape[0] for left, _ in splits), default=0)
    w = rmax + 2
    eye = np.eye(d, dtype=DTYPE)
    out = []
    for i in range(n):
        W = np.zeros((w, d, d, w), dtype=DTYPE)
        W[0, :, :, 0] = eye
        W[w - 1, :, :, w - 1] = eye
        if i < n - 1:
            for k, op in enumerate(splits[i][0]):
                W[0, :, :, 1 + k] = op
        if i > 0:
            for k, op in enumerate(splits[i - 1][1]):
                W[1 + k, :, :, w - 1] = op
        if i == 0:
            W = W[:1]
        if i == n - 1:
            W = W[..., w - 1 :]
        out.append(W)
    return out


def mpo_expectation(state: Mps, mpo: list) -> complex:
    env = np.ones((1, 1, 1), dtype=DTYPE)
    for a, W in zip(state.tensors, mpo):
        env = _left_env(env, a, W)
    return complex(env[0, 0, 0])


def _left_env(env, a, W):
    # env[x, w, y] conj(a)[x, s, x'] W[w, s, t, w'] a[y, t, y']
    tmp = np.tensordot(env, a, axes=(2, 0))  # x w t y'
    tmp = np.tensordot(tmp, W, axes=([1, 2], [0, 2]))  # x y' s w'
    out = np.tensordot(a.conj(), tmp, axes=([0, 1], [0, 2]))  # x' y' w'
    return out.transpose(0, 2, 1)


def _right_env(env, a, W):
    # env[x', w', y'] conj(a)[x, s, x'] W[w, s, t, w'] a[y, t, y']
    tmp = np.tensordot(a, env, axes=(2, 2))  # y t x' w'
    tmp = np.tensordot(tmp, W, axes=([1, 3], [2, 3]))  # y x' w s
    out = np.tensordot(a.conj(), tmp, axes=([1, 2], [3, 1]))  # x y w
    return out.transpose(0, 2, 1)


def _apply_heff(x, L, W, R):
    # L[a, w, a'] x[a', t, b'] W[w, s, t, v] R[b, v, b']
    tmp = np.tensordot(L, x, axes=(2, 0))  # a w t b'
    tmp = np.tensordot(tmp, W, axes=([1, 2], [0, 2]))  # a b' s v
    tmp = np.tensordot(tmp, R, axes=([1, 3], [2, 1]))  # a s b
    return tmp


def _local_ground(x, L, W, R, dense_max: int = 256):
    shape = x.shape
    dim = x.size
    if dim <= dense_max:
        basis = np.eye(dim, dtype=DTYPE).reshape((dim,) + shape)
        mat = np.stack([_apply_heff(b, L, W, R).reshape(-1) for b in basis], axis=1)
        mat = 0.5 * (mat + mat.conj().T)
        evals, evecs = np.linalg.eigh(mat)
        return float(evals[0]), evecs[:, 0].reshape(shape)
    op = spla.LinearOperator(
        (dim, dim), matvec=lambda v: _apply_heff(v.reshape(shape), L, W, R).reshape(-1), dtype=DTYPE
    )
    evals, evecs = spla.eigsh(op, k=1, which="SA", v0=x.reshape(-1), tol=1e-13, ncv=min(dim, 30))
    return float(evals[0]), evecs[:, 0].reshape(shape)


@dataclass(frozen=True)
class GroundSearchResult:
    energy: float
    state: Mps
    sweep_energies: tuple
    converged: bool


def mps_ground_search(
    ham: HamiltonianSpec,
    D: int,
    sweeps: int = 10,
    seed: int = 0,
    tol: float = 1e-12,
) -> GroundSearchResult:
    """Single-site alternating minimization over MPS with bond dimension ``D``.

    Starts from a random MPS with bonds ``min(D, d**i, d**(n-i))``. A local
    update is accepted only if it lowers the energy, so the recorded energies
    are non-increasing and every value is a variational upper bound.
    Energies are reported in the units of the unscaled Hamiltonian.
    """
    if D < 1:
        raise DomainError(f"D must be >= 1, got {D}")
    n = ham.n
    mpo = nearest_neighbour_mpo(ham)
    psi = random_mps(n, ham.d, D, seed)
    # right-canonical start: centre at site 0
    ts = list(canonicalize(psi).tensors)
    R = [None] * (n + 1)
    R[n] = np.ones((1, 1, 1), dtype=DTYPE)
    for i in range(n - 1, 0, -1):
        R[i] = _right_env(R[i + 1], ts[i], mpo[i])
    L = [None] * (n + 1)
    L[0] = np.ones((1, 1, 1), dtype=DTYPE)
    current = float(np.real(np.vdot(ts[0], _apply_heff(ts[0], L[0], mpo[0], R[1]))))
    history = []
    converged = False

    def optimize(i):
        nonlocal current
        x = ts[i]
        e, y = _local_ground(x, L[i], mpo[i], R[i + 1])
        if e < current:
            ts[i] = y / np.linalg.norm(y)
            current = e

    for _ in range(sweeps):
        for i in range(n - 1):
            optimize(i)
            dl, d, dr = ts[i].shape
            q, r = np.linalg.qr(ts[i].reshape(dl * d, dr))
            ts[i] = q.reshape(dl, d, q.shape[1])
            ts[i + 1] = np.tensordot(r, ts[i + 1], axes=(1, 0))
            L[i + 1] = _left_env(L[i], ts[i], mpo[i])
        for i in range(n - 1, 0, -1):
            optimize(i)
            dl, d, dr = ts[i].shape
            q, r = np.linalg.qr(ts[i].reshape(dl, d * dr).T)
            ts[i] = q.T.reshape(q.shape[1], d, dr)
            ts[i - 1] = np.tensordot(ts[i - 1], r.T, axes=(2, 0))
            R[i] = _right_env(R[i + 1], ts[i], mpo[i])
        optimize(0)
        history.append(current * ham.scale)
        if len(history) > 1 and history[-2] - history[-1] < tol * max(1.0, abs(history[-1])):
            converged = True
            break
    state = Mps(tuple(ts))
    state = state.scaled(1.0 / state.norm())
    return GroundSearchResult(history[-1], state, tuple(history), converged)


def variational_energy(state: Mps, ham: HamiltonianSpec) -> float:
    mpo = nearest_neighbour_mpo(ham)
    val = mpo_expectation(state, mpo) / inner_product(state, state)
    return float(np.real(val)) * ham.scale


def tfim_ground_state(n: int, h: float, D: Optional[int] = None, sweeps: int = 12, seed: int = 0) -> tuple[float, Mps]:
    """TFIM ground state: exact for small chains, variational otherwise."""
    if D is None and n <= 12:
        return tfim_exact_ground(n, h)
    res = mps_ground_search(tfim_hamiltonian(n, h), D or 24, sweeps=sweeps, seed=seed)
    return res.energy, res.state
