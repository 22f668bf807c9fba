"""Constant-bond-dimension approximation of all local properties of a chain state.

Pipeline, for a state ``psi`` in vidal form and a Schmidt budget ``D'``:

1. ``u_s``: ``psi`` with every bond from cut ``s`` to cut ``s+m`` projected
   onto its ``D'`` largest Schmidt vectors.
2. ``v_s``: ``u_s`` restricted to the window ``[s-b+1, s+m+b]``, the two
   chain halves outside replaced by base-``d`` digit encodings of their
   Schmidt labels on ``b = ceil(log_d D')`` pad sites.
3. ``w_i``: the windows ``s = i + kM`` (``M = m + 2b``) tiled along the
   chain, each left pad dressed with its own Haar unitary.
4. ``phi``: the normalized sum of ``w_i`` over the ``M`` offsets
   ``i = 1-m, ..., 2b``.

Site and cut numbers in this module are 1-based: site ``j`` is
``psi.tensors[j-1]`` and cut ``c`` separates sites ``1..c`` from
``c+1..n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .entanglement import truncation_profile
from .errors import DomainError, InternalError, StateError
from .metrics import ApproxReport, max_local_error_multi
from .mps import LocalWindow, Mps, apply_window_operator, canonicalize, concatenate, inner_product, linear_combination
from .tensor_core import DTYPE, derive_seed, haar_unitary

DEFAULT_RETRY_BUDGET = 8
DEFAULT_THRESHOLD = 0.5
#: Window widths over which the local error is measured unless told otherwise.
DEFAULT_WIDTHS = (1, 2, 3)


@dataclass(frozen=True)
class ConstructionParams:
    D_prime: int
    b: int
    m: int
    d: int
    n: int
    master_seed: int = 0
    retry_budget: int = DEFAULT_RETRY_BUDGET

    def __post_init__(self):
        if self.b < 1 or self.m < 1:
            raise DomainError(f"need b >= 1 and m >= 1, got b={self.b}, m={self.m}")
        if self.d**self.b < self.D_prime:
            raise DomainError("pad of b sites cannot hold D' labels")

    @property
    def M(self) -> int:
        return self.m + 2 * self.b

    @property
    def offsets(self) -> range:
        return range(1 - self.m, 2 * self.b + 1)


def pad_width(D_prime: int, d: int) -> int:
    """Smallest ``b >= 1`` with ``d**b >= D_prime``."""
    b = 1
    while d**b < D_prime:
        b += 1
    return b


def select_params(
    D_prime: int,
    epsilon: float,
    d: int,
    n: int,
    master_seed: int = 0,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    m_cap: Optional[int] = None,
) -> ConstructionParams:
    """``b = ceil(log_d D')`` and ``m = ceil((b**2 / epsilon)**(1/3))``.

    ``epsilon == 0`` sets ``m = n - 1`` (truncation is exact there). ``m_cap``
    optionally bounds ``m`` from above.
    """
    if D_prime < 1:
        raise DomainError(f"D_prime must be >= 1, got {D_prime}")
    if not 0 <= epsilon <= 1:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    b = pad_width(D_prime, d)
    if epsilon == 0:
        m = max(n - 1, 1)
    else:
        x = (b * b / epsilon) ** (1.0 / 3.0)
        m = math.ceil(x)
        # guard against cbrt rounding just above an integer
        if (m - 1) ** 3 * epsilon >= b * b:
            m -= 1
    if m_cap is not None:
        m = min(m, max(m_cap, 1))
    return ConstructionParams(int(D_prime), b, max(int(m), 1), d, n, master_seed, retry_budget)


# -- truncated states u_s ------------------------------------------------------

@dataclass(frozen=True)
class TruncatedState:
    """``u_s`` together with what the window compression needs to know about it."""

    state: Mps
    offset: int
    cuts: tuple
    left_weights: Optional[np.ndarray]

    def norm(self) -> float:
        return self.state.norm()


def truncated_cuts(n: int, s: int, m: int) -> range:
    return range(max(s, 1), min(s + m, n - 1) + 1)


def build_truncated_u(psi: Mps, offset: int, params: ConstructionParams) -> TruncatedState:
    """Project cuts ``max(s,1) .. min(s+m, n-1)`` of ``psi`` onto their top ``D'`` Schmidt vectors."""
    if psi.form != "vidal":
        raise StateError("build_truncated_u needs a vidal-form state")
    n, s = psi.n, offset
    cuts = truncated_cuts(n, s, params.m)
    keep = {c: min(params.D_prime, psi.bond_dims[c]) for c in cuts}
    ts = []
    for j in range(1, n + 1):
        t = psi.tensors[j - 1]
        if j - 1 in keep:
            t = t[: keep[j - 1]]
        if j in keep:
            t = t[:, :, : keep[j]]
        ts.append(t)
    left = None
    if 1 <= s <= n - 1:
        left = np.asarray(psi.schmidt[s - 1][: keep[s]])
    return TruncatedState(Mps(tuple(ts)), s, tuple(cuts), left)


# -- window states v_s ------------------------------------------------------------

def digits(label: int, b: int, d: int) -> list[int]:
    """Big-endian base-``d`` digits of ``label`` on ``b`` places."""
    out = []
    for _ in range(b):
        out.append(label % d)
        label //= d
    return out[::-1]


def _zero_site(d: int) -> np.ndarray:
    t = np.zeros((1, d, 1), dtype=DTYPE)
    t[0, 0, 0] = 1.0
    return t


def left_label_tensors(weights: np.ndarray, b: int, d: int) -> list:
    """Pad tensors encoding left Schmidt label ``a`` (amplitude ``weights[a]``) in ``b`` digits."""
    D = len(weights)
    if d**b < D:
        raise InternalError(f"{D} labels do not fit in {b} sites of dimension {d}")
    dig = [digits(a, b, d) for a in range(D)]
    out = []
    for p in range(b):
        t = np.zeros((1 if p == 0 else D, d, D), dtype=DTYPE)
        for a in range(D):
            t[0 if p == 0 else a, dig[a][p], a] = weights[a] if p == 0 else 1.0
        out.append(t)
    return out


def right_label_tensors(D: int, b: int, d: int) -> list:
    """Pad tensors encoding an orthonormal right Schmidt label in ``b`` digits."""
    if d**b < D:
        raise InternalError(f"{D} labels do not fit in {b} sites of dimension {d}")
    dig = [digits(c, b, d) for c in range(D)]
    out = []
    for p in range(b):
        last = p == b - 1
        t = np.zeros((D, d, 1 if last else D), dtype=DTYPE)
        for c in range(D):
            t[c, dig[c][p], 0 if last else c] = 1.0
        out.append(t)
    return out


@dataclass(frozen=True)
class WindowState:
    """``v_s`` on sites ``site_range`` (1-based, inclusive) of the chain.

    ``left_pad`` is the site interval the random unitary acts on, ``None``
    when the window starts at the chain end without a cut. ``inner`` is the
    interval on which the window reproduces ``u_s`` exactly.
    """

    offset: int
    period_index: int
    s: int
    site_range: tuple
    inner: Optional[tuple]
    left_pad: Optional[tuple]
    right_pad: Optional[tuple]
    tensors: tuple = field(repr=False)

    def segment(self) -> Mps:
        return Mps(self.tensors)

    def norm(self) -> float:
        return self.segment().norm()


def compress_to_window_v(
    u: TruncatedState,
    params: ConstructionParams,
    first: bool = True,
    last: bool = True,
    offset: Optional[int] = None,
    period_index: int = 0,
) -> WindowState:
    """Window state ``v_s`` whose inner reduced states equal those of ``u_s``.

    The first window of a tiling extends to site 1 and the last to site ``n``;
    the extra sites are set to ``|0>`` when the pad already holds the label, or
    kept as the actual chain tensors when fewer than ``b`` sites remain.
    """
    n, d, b, m = params.n, params.d, params.b, params.m
    s = u.offset
    ts = u.state.tensors
    r0 = 1 if first else s - b + 1
    r1 = n if last else s + m + b
    if r0 < 1 or r1 > n:
        raise InternalError(f"window [{r0}, {r1}] leaves the chain")
    if s >= n:
        # no inner site on the chain: the window is the untouched state
        lo = max(s - b + 1, 1)
        pad = (lo, n) if lo <= n else None
        return WindowState(offset if offset is not None else s, period_index, s, (r0, r1), None, pad, None, ts[r0 - 1 : r1])

    out = []
    left_pad = None
    if s >= 1:
        width = s - r0 + 1
        if u.left_weights is None or len(u.left_weights) != ts[s].shape[0]:
            raise InternalError("left Schmidt data does not match the truncated bond")
        if len(u.left_weights) > params.D_prime:
            raise InternalError("rank above D' at the left window cut")
        if width >= b:
            out.extend(_zero_site(d) for _ in range(width - b))
            out.extend(left_label_tensors(u.left_weights, b, d))
            left_pad = (s - b + 1, s)
        else:
            out.extend(ts[r0 - 1 : s])
            left_pad = (r0, s)
    lo, hi = max(s + 1, 1), min(s + m, n)
    out.extend(ts[lo - 1 : hi])
    right_pad = None
    t = s + m
    if t < n:
        if not last and r1 - t != b:
            raise InternalError("interior window with a malformed right pad")
        rank = ts[t].shape[0]
        if rank > params.D_prime:
            raise InternalError("rank above D' at the right window cut")
        width = r1 - t
        if width >= b:
            out.extend(right_label_tensors(rank, b, d))
            out.extend(_zero_site(d) for _ in range(width - b))
            right_pad = (t + 1, t + b)
        else:
            out.extend(ts[t:r1])
            right_pad = (t + 1, r1)
    elif r1 != n:
        raise InternalError("window reaches the chain end but is not the last one")
    if len(out) != r1 - r0 + 1:
        raise InternalError("window tensors do not cover the window")
    return WindowState(
        offset if offset is not None else s, period_index, s, (r0, r1), (lo, hi), left_pad, right_pad, tuple(out)
    )


def is_trivial_offset(i: int, params: ConstructionParams) -> bool:
    """Offsets whose single window spans the whole chain with no pad at all."""
    return i <= 0 and i + params.m >= params.n


def offset_windows(psi: Mps, i: int, params: ConstructionParams) -> list[WindowState]:
    """All window states ``v_{i+kM}``, ``k = 0 .. floor((n-1-i)/M)``, tiling the chain."""
    n, M = params.n, params.M
    K = max((n - 1 - i) // M, 0)
    out = []
    for k in range(K + 1):
        u = build_truncated_u(psi, i + k * M, params)
        out.append(compress_to_window_v(u, params, first=k == 0, last=k == K, offset=i, period_index=k))
    return out


def check_tiling(windows: Sequence[WindowState], n: int) -> None:
    pos = 1
    for w in windows:
        if w.site_range[0] != pos:
            raise InternalError(f"windows do not tile the chain at site {pos}")
        pos = w.site_range[1] + 1
    if pos != n + 1:
        raise InternalError("windows do not reach the chain end")


def window_seed(seed: int, attempt: int, offset: int, k: int) -> int:
    return derive_seed(seed, attempt, offset, k)


def randomize_w(
    offset: int,
    windows: Sequence[WindowState],
    params: ConstructionParams,
    seed: Optional[int],
    attempt: int = 0,
) -> Mps:
    """``w_i``: the tensor product of the windows, each left pad rotated by a Haar unitary.

    ``seed=None`` uses identity unitaries.
    """
    check_tiling(windows, params.n)
    d = params.d
    parts = []
    for w in windows:
        seg = w.segment()
        if seed is not None and w.left_pad is not None:
            p0, p1 = w.left_pad
            width = p1 - p0 + 1
            V = haar_unitary(d**width, window_seed(seed, attempt, offset, w.period_index))
            seg = apply_window_operator(seg, LocalWindow(p0 - w.site_range[0], width), V)
        parts.append(seg)
    return concatenate(parts)


def assemble_phi(ws: Sequence[Mps], multiplicities: Optional[Sequence[int]] = None) -> Mps:
    """Normalized ``sum_i w_i``; identical ``w_i`` may be passed once with a multiplicity."""
    if not ws:
        raise DomainError("nothing to assemble")
    mult = [1] * len(ws) if multiplicities is None else list(multiplicities)
    total = sum(mult)
    phi = linear_combination(list(ws), [c / np.sqrt(total) for c in mult])
    nrm = phi.norm()
    if nrm == 0:
        raise InternalError("assembled state vanished")
    return phi.scaled(1.0 / nrm)


# -- driver ------------------------------------------------------------------------

@dataclass
class OffsetGroup:
    offset: int
    multiplicity: int
    windows: list


def offset_groups(psi: Mps, params: ConstructionParams) -> list[OffsetGroup]:
    """Windows for every offset, with all pad-free offsets merged into one group.

    Pad-free offsets give bitwise-identical ``w_i`` (no unitary acts), so the
    sum over ``M`` offsets only needs ``n - 1 + 2b`` distinct states at most.
    """
    n, m, b = params.n, params.m, params.b
    lo_triv = max(1 - m, n - m)
    n_triv = max(0 - lo_triv + 1, 0)
    if n_triv:
        distinct = list(range(1 - m, lo_triv)) + list(range(1, 2 * b + 1))
    else:
        distinct = list(params.offsets)
    groups = [OffsetGroup(i, 1, offset_windows(psi, i, params)) for i in distinct]
    if n_triv:
        groups.append(OffsetGroup(0, n_triv, offset_windows(psi, 0, params)))
    if sum(g.multiplicity for g in groups) != params.M:
        raise InternalError("offset groups do not account for all M offsets")
    return groups


def build_ws(groups: Sequence[OffsetGroup], params: ConstructionParams, seed: Optional[int], attempt: int = 0) -> list[Mps]:
    return [randomize_w(g.offset, g.windows, params, seed, attempt) for g in groups]


def construct(
    psi: Mps,
    D_prime: int,
    seed: int = 0,
    widths: Sequence[int] = DEFAULT_WIDTHS,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    threshold: float = DEFAULT_THRESHOLD,
    m: Optional[int] = None,
    m_cap: Optional[int] = None,
) -> tuple[Mps, ApproxReport]:
    """Build ``phi`` for ``psi`` with Schmidt budget ``D_prime`` and measure its local error.

    If the worst local error exceeds ``threshold``, all unitaries are
    redrawn (``attempt`` enters their seeds) up to ``retry_budget`` times and
    the best attempt is returned; ``report.accepted`` says whether it met
    the threshold. ``m`` overrides the recipe value.
    """
    can = canonicalize(psi)
    n, d = can.n, can.d
    eps = truncation_profile(can, D_prime).epsilon
    params = select_params(D_prime, eps, d, n, seed, retry_budget, m_cap)
    if m is not None:
        params = ConstructionParams(params.D_prime, params.b, int(m), d, n, seed, retry_budget)
    widths = [w for w in widths if w <= n]
    base = dict(d_prime=int(D_prime), b=params.b, m=params.m, M=params.M, epsilon=float(eps), threshold=float(threshold), widths=list(widths))

    if eps == 0 and m is None:
        # the pad error decays like b/m and the recipe sends m to infinity
        # here, so the limit of the construction is psi itself
        err, per = max_local_error_multi(can, can, widths)
        report = ApproxReport(
            bond_dim_phi=can.max_bond,
            bond_dim_compressed=can.max_bond,
            max_local_error=float(err),
            per_window_errors=per,
            seeds={"master": int(seed), "attempt": 0},
            attempts=1,
            accepted=bool(err <= threshold),
            attempt_errors=[float(err)],
            exact_shortcut=True,
            **base,
        )
        return can, report

    groups = offset_groups(can, params)
    mult = [g.multiplicity for g in groups]
    best = None
    errors = []
    for attempt in range(retry_budget + 1):
        ws = build_ws(groups, params, seed, attempt)
        phi = assemble_phi(ws, mult)
        phi_c = canonicalize(phi)
        err, per = max_local_error_multi(can, phi_c, widths)
        errors.append(float(err))
        if best is None or err < best[0]:
            best = (err, per, phi, phi_c, attempt)
        if err <= threshold:
            break
    err, per, phi, phi_c, attempt = best
    report = ApproxReport(
        bond_dim_phi=phi.max_bond,
        bond_dim_compressed=phi_c.max_bond,
        max_local_error=float(err),
        per_window_errors=per,
        seeds={"master": int(seed), "attempt": int(attempt)},
        attempts=len(errors),
        accepted=bool(err <= threshold),
        attempt_errors=errors,
        **base,
    )
    return phi, report


def inner_lemma_terms(psi: Mps, offset: int, params: ConstructionParams) -> tuple[float, float, float]:
    """``(||psi - u_s||**2, 2 * sum of truncated tails, 2 (m+1) eps)``."""
    can = canonicalize(psi)
    u = build_truncated_u(can, offset, params)
    lhs = 1.0 + inner_product(u.state, u.state).real - 2.0 * inner_product(can, u.state).real
    prof = truncation_profile(can, params.D_prime)
    middle = 2.0 * sum(prof.tail(c) for c in u.cuts)
    rhs = 2.0 * (params.m + 1) * prof.epsilon
    return max(float(lhs), 0.0), float(middle), float(rhs)
