"""Dense complex kernels: truncated SVD, Hermitian eigensolver, Haar unitaries.

All tolerances used across the package live here.
"""

from __future__ import annotations

from typing import NamedTuple, Union

import numpy as np

from .errors import DomainError, NumericError, ShapeError

#: Tolerance for identities that hold exactly in exact arithmetic.
TOL_EXACT = 1e-10
#: Singular values below ``RANK_CUTOFF * s_max`` count as zero.
RANK_CUTOFF = 1e-12
#: Tolerance for the Haar unitarity check.
TOL_UNITARY = 1e-12

DTYPE = np.complex128


class SvdResult(NamedTuple):
    """Thin SVD ``matrix ~= left_isometry @ diag(singular_values) @ right_isometry``."""

    left_isometry: np.ndarray
    singular_values: np.ndarray
    right_isometry: np.ndarray


def as_matrix(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=DTYPE)
    if arr.ndim != 2:
        raise ShapeError(f"expected a rank-2 array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("matrix has non-finite entries")
    return arr


def _svd(arr: np.ndarray):
    try:
        return np.linalg.svd(arr, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        import scipy.linalg

        return scipy.linalg.svd(arr, full_matrices=False, lapack_driver="gesvd")


def svd_truncated(matrix, keep: Union[int, str] = "all") -> SvdResult:
    """Top-``keep`` singular triplets of a rank-2 array.

    Parameters
    ----------
    matrix : array_like
        Rank-2 array with finite entries.
    keep : int or "all"
        Number of singular triplets to retain.

    Returns
    -------
    SvdResult
        Factors with singular values in descending order.
    """
    arr = as_matrix(matrix)
    u, s, vh = _svd(arr)
    if keep == "all":
        return SvdResult(u, s, vh)
    if not isinstance(keep, (int, np.integer)) or keep < 1:
        raise DomainError(f"keep must be a positive integer or 'all', got {keep!r}")
    if keep > s.size:
        raise DomainError(f"keep={keep} exceeds min(rows, cols)={s.size}")
    return SvdResult(u[:, :keep], s[:keep], vh[:keep, :])


def numerical_rank(singular_values: np.ndarray, cutoff: float = RANK_CUTOFF) -> int:
    """Number of singular values above ``cutoff`` times the largest one."""
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > cutoff * s[0]))


def svd_rank_revealing(matrix, cutoff: float = RANK_CUTOFF) -> SvdResult:
    """Thin SVD with numerically zero singular values dropped (at least one kept)."""
    u, s, vh = svd_truncated(matrix)
    r = max(numerical_rank(s, cutoff), 1)
    return SvdResult(u[:, :r], s[:r], vh[:r, :])


def hermitian_eigen(matrix, tol: float = TOL_EXACT) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Raises :class:`DomainError` if ``matrix`` deviates from its adjoint by more
    than ``tol`` (max-entry norm, relative to ``max(1, |matrix|)``).
    """
    arr = as_matrix(matrix)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    scale = max(1.0, float(np.max(np.abs(arr))) if arr.size else 1.0)
    if arr.size and np.max(np.abs(arr - arr.conj().T)) > tol * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    herm = 0.5 * (arr + arr.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    return evals[::-1].copy(), evecs[:, ::-1].copy()


def trace_norm_hermitian(matrix) -> float:
    """Schatten-1 norm of a Hermitian matrix (sum of absolute eigenvalues)."""
    evals, _ = hermitian_eigen(matrix)
    return float(np.sum(np.abs(evals)))


def haar_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed ``dim x dim`` unitary, deterministic in ``seed``.

    QR of a complex Ginibre matrix with the phases of ``diag(R)`` moved into
    ``Q`` so the result is Haar rather than QR-convention biased.
    """
    if dim < 1:
        raise DomainError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases[np.newaxis, :]


def random_hermitian(dim: int, rng: np.random.Generator, norm: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix rescaled to spectral norm ``norm``."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (z + z.conj().T)
    return h * (norm / np.max(np.abs(np.linalg.eigvalsh(h))))


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from integer parts (negative parts allowed)."""
    entropy = [int(p) % (1 << 64) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
