"""Finite open-boundary matrix product states.

Site tensors carry legs ``(left bond, physical, right bond)``. Site ``i`` of the
chain (1-based in the docs, 0-based in code) sits between cut ``i-1`` and
cut ``i``; cut ``c`` separates sites ``1..c`` from ``c+1..n``.

The canonical form used throughout is the one in which every tensor is a
right isometry, ``sum_j A_j A_j^dagger = I``, and every bond index labels
the Schmidt basis of its cut, so that
``sum_j A_j^dagger diag(lambda_{i-1}^2) A_j = diag(lambda_i^2)``.
This is the Vidal form with the Schmidt weights absorbed to the left of each
Gamma tensor, and it is tagged ``"vidal"``.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InternalError, ResourceError, ShapeError, StateError
from .tensor_core import DTYPE, RANK_CUTOFF, TOL_EXACT, svd_rank_revealing

#: Largest ``n * log2(d)`` accepted by dense conversions.
DENSE_CAP_QUBITS = 26
#: Largest window width accepted by :func:`reduced_density_matrix`.
RDM_WIDTH_CAP = 4

FORMS = ("none", "left", "right", "vidal")


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients at one cut, descending, squares summing to one."""

    cut: int
    lambdas: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.lambdas**2

    @property
    def rank(self) -> int:
        return int(self.lambdas.size)


@dataclass(frozen=True)
class LocalWindow:
    """Contiguous sites ``start .. start+width-1`` (0-based) plus an optional observable."""

    start: int
    width: int
    observable: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.width < 1 or self.start < 0:
            raise DomainError(f"invalid window start={self.start} width={self.width}")
        if self.observable is not None:
            op = np.asarray(self.observable, dtype=DTYPE)
            if op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise ShapeError("observable must be a square matrix")
            if np.max(np.abs(op - op.conj().T)) > TOL_EXACT:
                raise DomainError("observable is not Hermitian")
            if np.linalg.norm(op, 2) > 1 + TOL_EXACT:
                raise DomainError("observable has operator norm above 1")
            object.__setattr__(self, "observable", op)

    @property
    def stop(self) -> int:
        return self.start + self.width

    def check(self, n: int, d: int) -> None:
        if self.stop > n:
            raise DomainError(f"window [{self.start}, {self.stop}) exceeds chain of {n} sites")
        if self.observable is not None and self.observable.shape[0] != d**self.width:
            raise ShapeError("observable extent does not match the window")


@dataclass(frozen=True, eq=False)
class Mps:
    """Immutable MPS: a tuple of rank-3 site tensors plus a gauge tag.

    ``schmidt`` holds the Schmidt coefficients of the ``n-1`` interior cuts
    when ``form == "vidal"``; it is ``None`` otherwise.
    """

    tensors: tuple
    form: str = "none"
    schmidt: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        ts = []
        for i, t in enumerate(self.tensors):
            a = np.array(t, dtype=DTYPE, copy=True)
            if a.ndim != 3:
                raise ShapeError(f"site {i} tensor has {a.ndim} legs, expected 3")
            a.setflags(write=False)
            ts.append(a)
        if not ts:
            raise ShapeError("an MPS needs at least one site")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ShapeError("boundary bonds must have dimension 1")
        d = ts[0].shape[1]
        for i in range(len(ts)):
            if ts[i].shape[1] != d:
                raise ShapeError("physical dimension must be the same at every site")
            if i + 1 < len(ts) and ts[i].shape[2] != ts[i + 1].shape[0]:
                raise ShapeError(f"bond mismatch between sites {i} and {i + 1}")
        if self.form not in FORMS:
            raise DomainError(f"unknown form {self.form!r}")
        object.__setattr__(self, "tensors", tuple(ts))
        if self.schmidt is not None:
            lam = []
            for x in self.schmidt:
                x = np.array(x, dtype=float, copy=True)
                x.setflags(write=False)
                lam.append(x)
            object.__setattr__(self, "schmidt", tuple(lam))

    @property
    def n(self) -> int:
        return len(self.tensors)

    @property
    def d(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        """``[D_0, D_1, ..., D_n]`` with ``D_0 = D_n = 1``."""
        return [1] + [t.shape[2] for t in self.tensors]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def spectra(self) -> list[SchmidtSpectrum]:
        if self.form != "vidal":
            raise StateError("Schmidt spectra are only stored in vidal form")
        return [SchmidtSpectrum(c + 1, lam) for c, lam in enumerate(self.schmidt)]

    def scaled(self, factor: complex) -> "Mps":
        """Copy with the state multiplied by ``factor`` (applied to the first tensor)."""
        ts = list(self.tensors)
        ts[0] = ts[0] * factor
        return Mps(tuple(ts))

    def norm(self) -> float:
        return float(np.sqrt(max(inner_product(self, self).real, 0.0)))

    def normalized(self) -> "Mps":
        nrm = self.norm()
        if nrm == 0:
            raise DomainError("cannot normalize a zero-norm state")
        if self.form == "vidal":
            return self
        return self.scaled(1.0 / nrm)


def _check_pair(a: Mps, b: Mps) -> None:
    if a.n != b.n or a.d != b.d:
        raise ShapeError(f"incompatible states: (n={a.n}, d={a.d}) vs (n={b.n}, d={b.d})")


def inner_product(a: Mps, b: Mps) -> complex:
    """``<a|b>`` by left-to-right transfer contraction."""
    _check_pair(a, b)
    env = np.ones((1, 1), dtype=DTYPE)
    for ta, tb in zip(a.tensors, b.tensors):
        # env[x, y] conj(ta)[x, s, x'] tb[y, s, y']
        rows = ta.shape[0] * ta.shape[1]
        tmp = (env @ tb.reshape(tb.shape[0], -1)).reshape(rows, tb.shape[2])
        env = ta.conj().reshape(rows, ta.shape[2]).T @ tmp
    return complex(env[0, 0])


def _left_orthonormalize(tensors: list) -> tuple[list, complex]:
    """QR sweep; returns left-isometric tensors and the leftover scalar."""
    ts = list(tensors)
    for i in range(len(ts) - 1):
        dl, d, dr = ts[i].shape
        q, r = np.linalg.qr(ts[i].reshape(dl * d, dr))
        ts[i] = q.reshape(dl, d, q.shape[1])
        ts[i + 1] = np.tensordot(r, ts[i + 1], axes=(1, 0))
    last = ts[-1]
    scale = np.linalg.norm(last)
    return ts, scale


def canonicalize(state: Mps, cutoff: float = RANK_CUTOFF) -> Mps:
    """Normalized vidal-form copy of ``state`` with all Schmidt spectra.

    Schmidt values below ``cutoff`` times the largest one are dropped, so
    bond dimensions never grow and spurious ranks are removed.
    """
    if state.form == "vidal":
        return state
    ts, scale = _left_orthonormalize(list(state.tensors))
    if scale == 0 or not np.isfinite(scale):
        raise DomainError("cannot canonicalize a zero-norm state")
    ts[-1] = ts[-1] / scale
    n = len(ts)
    lambdas: list = [None] * (n - 1)
    for i in range(n - 1, 0, -1):
        dl, d, dr = ts[i].shape
        u, s, vh = svd_rank_revealing(ts[i].reshape(dl, d * dr), cutoff)
        s = s / np.linalg.norm(s)
        ts[i] = vh.reshape(len(s), d, dr)
        lambdas[i - 1] = s
        ts[i - 1] = np.tensordot(ts[i - 1], u * s[np.newaxis, :], axes=(2, 0))
    first = ts[0]
    ts[0] = first / np.linalg.norm(first)
    return Mps(tuple(ts), form="vidal", schmidt=tuple(lambdas))


def schmidt_spectra(state: Mps) -> list[SchmidtSpectrum]:
    """Schmidt spectra at cuts ``1..n-1``."""
    return canonicalize(state).spectra()


def canonical_residuals(state: Mps) -> tuple[float, float]:
    """Largest violations of the two vidal-form identities over all sites.

    Returns ``(isometry_residual, schmidt_residual)`` for
    ``sum_j A_j A_j^dagger = I`` and
    ``sum_j A_j^dagger Lambda_{i-1} A_j = Lambda_i``.
    """
    if state.form != "vidal":
        raise StateError("state is not in vidal form")
    lam = [np.ones(1)] + [np.asarray(x) for x in state.schmidt] + [np.ones(1)]
    iso = 0.0
    sch = 0.0
    for i, a in enumerate(state.tensors):
        dl, d, dr = a.shape
        mat = a.reshape(dl, d * dr)
        iso = max(iso, float(np.max(np.abs(mat @ mat.conj().T - np.eye(dl)))))
        left = lam[i] ** 2
        acc = np.zeros((dr, dr), dtype=DTYPE)
        for j in range(d):
            aj = a[:, j, :]
            acc += aj.conj().T @ (left[:, np.newaxis] * aj)
        sch = max(sch, float(np.max(np.abs(acc - np.diag(lam[i + 1] ** 2)))))
    return iso, sch


def add(a: Mps, b: Mps, coeff_a: complex = 1.0, coeff_b: complex = 1.0) -> Mps:
    """``coeff_a |a> + coeff_b |b>`` by direct-sum blocks, no compression."""
    _check_pair(a, b)
    n = a.n
    if n == 1:
        return Mps((coeff_a * a.tensors[0] + coeff_b * b.tensors[0],))
    ts = []
    for i, (x, y) in enumerate(zip(a.tensors, b.tensors)):
        if i == 0:
            ts.append(np.concatenate([coeff_a * x, coeff_b * y], axis=2))
        elif i == n - 1:
            ts.append(np.concatenate([x, y], axis=0))
        else:
            blk = np.zeros((x.shape[0] + y.shape[0], x.shape[1], x.shape[2] + y.shape[2]), dtype=DTYPE)
            blk[: x.shape[0], :, : x.shape[2]] = x
            blk[x.shape[0] :, :, x.shape[2] :] = y
            ts.append(blk)
    return Mps(tuple(ts))


def linear_combination(states: Sequence[Mps], coeffs: Sequence[complex]) -> Mps:
    """``sum_k coeffs[k] |states[k]>`` as a single direct-sum MPS."""
    if not states:
        raise DomainError("empty linear combination")
    for s in states[1:]:
        _check_pair(states[0], s)
    n = states[0].n
    if n == 1:
        return Mps((sum(c * s.tensors[0] for s, c in zip(states, coeffs)),))
    ts = []
    for i in range(n):
        blocks = [s.tensors[i] for s in states]
        if i == 0:
            ts.append(np.concatenate([c * t for t, c in zip(blocks, coeffs)], axis=2))
        elif i == n - 1:
            ts.append(np.concatenate(blocks, axis=0))
        else:
            rows = sum(t.shape[0] for t in blocks)
            cols = sum(t.shape[2] for t in blocks)
            blk = np.zeros((rows, blocks[0].shape[1], cols), dtype=DTYPE)
            r0 = c0 = 0
            for t in blocks:
                blk[r0 : r0 + t.shape[0], :, c0 : c0 + t.shape[2]] = t
                r0 += t.shape[0]
                c0 += t.shape[2]
            ts.append(blk)
    return Mps(tuple(ts))


def split_block(block: np.ndarray, width: int, d: int, cutoff: float = 0.0) -> list:
    """Split ``(Dl, d**width, Dr)`` into ``width`` site tensors by successive SVDs.

    With the default ``cutoff=0`` only exactly-zero singular values are removed,
    so the split is lossless.
    """
    dl, _, dr = block.shape
    rest = block.reshape(dl, d ** width * dr)
    out = []
    left = dl
    for k in range(width - 1):
        mat = rest.reshape(left * d, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        if cutoff > 0:
            r = max(int(np.count_nonzero(s > cutoff * s[0])) if s[0] > 0 else 1, 1)
        else:
            r = max(int(np.count_nonzero(s > 0)), 1)
        out.append(u[:, :r].reshape(left, d, r))
        rest = s[:r, np.newaxis] * vh[:r, :]
        left = r
    out.append(rest.reshape(left, d, dr))
    return out


def contract_window(state: Mps, start: int, width: int) -> np.ndarray:
    """Contract sites ``start..start+width-1`` into a ``(Dl, d**width, Dr)`` block."""
    block = state.tensors[start]
    for t in state.tensors[start + 1 : start + width]:
        block = np.tensordot(block, t, axes=(2, 0))
        block = block.reshape(block.shape[0], -1, block.shape[-1])
    return block


def apply_window_operator(state: Mps, window: LocalWindow, op, cutoff: float = 0.0) -> Mps:
    """Apply a ``d**width`` square operator to the window sites.

    The window block is re-split with a lossless SVD pass; the rest of the
    chain is untouched. The result carries no canonical tag.
    """
    window.check(state.n, state.d)
    op = np.asarray(op, dtype=DTYPE)
    d, w = state.d, window.width
    if op.shape != (d**w, d**w):
        raise ShapeError(f"operator shape {op.shape} does not match window extent {d**w}")
    block = contract_window(state, window.start, w)
    block = np.einsum("ab,xby->xay", op, block)
    pieces = split_block(block, w, d, cutoff)
    ts = list(state.tensors)
    ts[window.start : window.stop] = pieces
    return Mps(tuple(ts))


def _window_rdm_vidal(state: Mps, start: int, width: int) -> np.ndarray:
    lam = np.ones(1) if start == 0 else np.asarray(state.schmidt[start - 1])
    block = contract_window(state, start, width)
    block = lam[:, np.newaxis, np.newaxis] * block
    dl, dw, dr = block.shape
    mat = block.transpose(1, 0, 2).reshape(dw, dl * dr)
    rho = mat @ mat.conj().T
    return 0.5 * (rho + rho.conj().T)


def reduced_density_matrix(state: Mps, window: LocalWindow, width_cap: int = RDM_WIDTH_CAP) -> np.ndarray:
    """Unit-trace reduced density matrix of the window sites.

    Uses the canonical form, so the right environment is the identity and the
    left environment is the squared Schmidt spectrum of the window's left cut.
    """
    if window.width > width_cap:
        raise ResourceError(f"window width {window.width} exceeds cap {width_cap}")
    window.check(state.n, state.d)
    can = canonicalize(state)
    return _window_rdm_vidal(can, window.start, window.width)


def all_window_rdms(state: Mps, width: int, width_cap: int = RDM_WIDTH_CAP) -> list[np.ndarray]:
    """Reduced density matrices of every contiguous width-``width`` window, left to right."""
    if width > width_cap:
        raise ResourceError(f"window width {width} exceeds cap {width_cap}")
    if width > state.n:
        raise DomainError("window wider than chain")
    can = canonicalize(state)
    return [_window_rdm_vidal(can, s, width) for s in range(state.n - width + 1)]


def expectation(state: Mps, window: LocalWindow) -> float:
    """``<O>`` for the window's observable, normalized by ``<psi|psi>``."""
    if window.observable is None:
        raise DomainError("window carries no observable")
    rho = reduced_density_matrix(state, window)
    return float(np.real(np.trace(window.observable @ rho)))


def _check_dense_cap(n: int, d: int) -> None:
    if n * np.log2(d) > DENSE_CAP_QUBITS + 1e-9:
        raise ResourceError(f"d**n = {d}**{n} exceeds the dense cap of 2**{DENSE_CAP_QUBITS}")


def to_dense(state: Mps) -> np.ndarray:
    """Full state vector, site 1 as the most significant digit."""
    _check_dense_cap(state.n, state.d)
    vec = state.tensors[0].reshape(state.d, -1)
    for t in state.tensors[1:]:
        vec = (vec @ t.reshape(t.shape[0], -1)).reshape(-1, t.shape[2])
    return vec.reshape(-1)


def from_dense(vector, n: int, d: int, cutoff: float = RANK_CUTOFF) -> Mps:
    """Exact MPS of a dense vector by successive rank-revealing SVDs."""
    _check_dense_cap(n, d)
    vec = np.asarray(vector, dtype=DTYPE).reshape(-1)
    if vec.size != d**n:
        raise ShapeError(f"vector of length {vec.size} is not d**n = {d**n}")
    ts = []
    rest = vec.reshape(1, -1)
    left = 1
    for _ in range(n - 1):
        u, s, vh = svd_rank_revealing(rest.reshape(left * d, -1), cutoff)
        ts.append(u.reshape(left, d, len(s)))
        rest = s[:, np.newaxis] * vh
        left = len(s)
    ts.append(rest.reshape(left, d, 1))
    return Mps(tuple(ts), form="left")


def product_state(local_states: Sequence, d: Optional[int] = None) -> Mps:
    """Product MPS from per-site vectors or computational-basis indices."""
    ts = []
    for v in local_states:
        if np.isscalar(v):
            if d is None:
                raise DomainError("d is required for basis-index product states")
            vec = np.zeros(d, dtype=DTYPE)
            vec[int(v)] = 1.0
        else:
            vec = np.asarray(v, dtype=DTYPE)
        ts.append(vec.reshape(1, -1, 1))
    return Mps(tuple(ts))


def concatenate(parts: Sequence[Mps]) -> Mps:
    """Tensor product of states on consecutive segments of a chain."""
    ts = []
    for p in parts:
        ts.extend(p.tensors)
    return Mps(tuple(ts))


# -- binary container ---------------------------------------------------------

MAGIC = b"MPS1"


def dumps(state: Mps) -> bytes:
    """Serialize to the ``MPS1`` container.

    Layout (all little-endian): 4-byte magic ``MPS1``; ``n`` and ``d`` as
    uint64; ``n+1`` bond dimensions as uint64; then each site tensor in
    row-major ``(D_left, d, D_right)`` order as float64 pairs ``(re, im)``.
    """
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<QQ", state.n, state.d))
    buf.write(np.asarray(state.bond_dims, dtype="<u8").tobytes())
    for t in state.tensors:
        buf.write(np.ascontiguousarray(t).astype("<c16").view("<f8").tobytes())
    return buf.getvalue()


def loads(data: bytes) -> Mps:
    """Inverse of :func:`dumps`; bit-exact."""
    if data[:4] != MAGIC:
        raise ShapeError("not an MPS1 container")
    n, d = struct.unpack_from("<QQ", data, 4)
    off = 20
    bonds = np.frombuffer(data, dtype="<u8", count=n + 1, offset=off).astype(int)
    off += 8 * (n + 1)
    ts = []
    for i in range(n):
        count = int(bonds[i] * d * bonds[i + 1])
        flat = np.frombuffer(data, dtype="<f8", count=2 * count, offset=off)
        off += 16 * count
        ts.append(flat.view("<c16").reshape(int(bonds[i]), int(d), int(bonds[i + 1])).astype(DTYPE))
    if off != len(data):
        raise InternalError("trailing bytes in MPS1 container")
    return Mps(tuple(ts))


def save(state: Mps, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(state))


def load(path) -> Mps:
    with open(path, "rb") as fh:
        return loads(fh.read())
