"""Dense-vector oracles, written independently of the MPS contraction code."""

import itertools

import numpy as np
import pytest


def brute_force_dense(state):
    """Amplitudes by explicit matrix products over every basis configuration."""
    n, d = state.n, state.d
    out = np.zeros(d**n, dtype=complex)
    for idx, conf in enumerate(itertools.product(range(d), repeat=n)):
        mat = np.eye(1, dtype=complex)
        for t, s in zip(state.tensors, conf):
            mat = mat @ t[:, s, :]
        out[idx] = mat[0, 0]
    return out


def dense_rdm(vec, n, d, start, width):
    """Partial trace of ``|vec><vec|`` onto sites ``start .. start+width-1`` (0-based), unit trace."""
    psi = np.asarray(vec).reshape(d**start, d**width, d ** (n - start - width))
    rho = np.einsum("aib,ajb->ij", psi, psi.conj())
    return rho / np.trace(rho)


def dense_schmidt(vec, n, d, cut):
    vec = np.asarray(vec) / np.linalg.norm(vec)
    s = np.linalg.svd(vec.reshape(d**cut, d ** (n - cut)), compute_uv=False)
    return s


def dense_trace_distance(a, b):
    return float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
