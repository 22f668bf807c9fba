"""Checks of the construction's intermediate inequalities, cross-term statistics and sweeps."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .bounds import fit_exponent
from .construction import (
    DEFAULT_WIDTHS,
    ConstructionParams,
    TruncatedState,
    build_truncated_u,
    build_ws,
    construct,
    inner_lemma_terms,
    offset_groups,
    select_params,
)
from .entanglement import truncation_profile
from .errors import DomainError
from .metrics import ApproxReport, max_local_error, max_local_error_multi, trace_distance
from .mps import LocalWindow, Mps, apply_window_operator, canonicalize, inner_product, reduced_density_matrix
from .tensor_core import hermitian_eigen, random_hermitian

__all__ = [
    "ApproxReport",
    "max_local_error",
    "max_local_error_multi",
    "trace_distance",
    "optimal_observable",
    "Lemma4Check",
    "lemma4_check",
    "window_equality_check",
    "CrossTermSummary",
    "cross_terms",
    "cross_term_stats",
    "SweepResult",
    "sweep",
    "error_curve",
]

#: Slack on the inner truncation-lemma chain of inequalities.
TOL_LEMMA = 1e-9


def optimal_observable(rho, sigma) -> np.ndarray:
    """Sign of ``rho - sigma``: the unit-norm observable attaining the trace distance."""
    evals, evecs = hermitian_eigen(np.asarray(rho) - np.asarray(sigma))
    return (evecs * np.sign(evals)) @ evecs.conj().T


@dataclass(frozen=True)
class Lemma4Check:
    lhs: float
    middle: float
    rhs: float
    holds: bool


def lemma4_check(psi: Mps, D_prime: int, offset: int, m: int) -> Lemma4Check:
    """``||psi - u_s||^2 <= 2 sum_k tail_k <= 2 (m+1) eps`` for one truncated state."""
    can = canonicalize(psi)
    eps = truncation_profile(can, D_prime).epsilon
    base = select_params(D_prime, eps, can.d, can.n)
    params = ConstructionParams(base.D_prime, base.b, m, can.d, can.n)
    lhs, middle, rhs = inner_lemma_terms(can, offset, params)
    holds = lhs <= middle + TOL_LEMMA and middle <= rhs + TOL_LEMMA
    return Lemma4Check(lhs, middle, rhs, bool(holds))


def window_equality_check(
    w: Mps,
    u: Union[Mps, TruncatedState],
    window: LocalWindow,
    trials: int = 50,
    seed: int = 0,
) -> float:
    """Largest ``|<O>_w - <O>_u|`` over random unit-norm Hermitian ``O`` on ``window``.

    Both expectation values are normalized by the state norms.
    """
    if isinstance(u, TruncatedState):
        u = u.state
    rho_w = reduced_density_matrix(w, window)
    rho_u = reduced_density_matrix(u, window)
    rng = np.random.default_rng(seed)
    dim = rho_w.shape[0]
    worst = 0.0
    for _ in range(trials):
        op = random_hermitian(dim, rng, norm=rng.uniform(0.0, 1.0))
        worst = max(worst, abs(float(np.real(np.trace(op @ (rho_w - rho_u))))))
    return worst


# -- cross terms --------------------------------------------------------------

def cross_terms(ws: Sequence[Mps], observables: Sequence[LocalWindow]) -> np.ndarray:
    """``|<w_i|O|w_j>|`` for all ``i != j`` and all observables, states normalized first.

    Returns an array of shape ``(len(observables), len(ws)*(len(ws)-1))``.
    """
    if len(ws) < 2:
        raise DomainError("cross terms need at least two states")
    normed = [w.scaled(1.0 / w.norm()) for w in ws]
    out = []
    for obs in observables:
        applied = [apply_window_operator(w, obs, obs.observable) for w in normed]
        vals = [abs(inner_product(wi, oj)) for i, wi in enumerate(normed) for j, oj in enumerate(applied) if i != j]
        out.append(vals)
    return np.asarray(out)


@dataclass(frozen=True)
class CrossTermSummary:
    seeds: tuple
    per_seed_mean: tuple
    per_seed_max: tuple

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_seed_mean))

    @property
    def stderr(self) -> float:
        x = np.asarray(self.per_seed_mean)
        return float(np.std(x, ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0

    @property
    def max(self) -> float:
        return float(np.max(self.per_seed_max))


def cross_term_stats(
    ws_for_seed: Callable[[int], Sequence[Mps]],
    observables: Sequence[LocalWindow],
    seeds: Sequence[int],
) -> CrossTermSummary:
    """Mean and max cross term per seed, where ``ws_for_seed(seed)`` builds the ``w_i``."""
    means, maxes = [], []
    for s in seeds:
        vals = cross_terms(ws_for_seed(s), observables)
        means.append(float(np.mean(vals)))
        maxes.append(float(np.max(vals)))
    return CrossTermSummary(tuple(seeds), tuple(means), tuple(maxes))


def construction_ws(psi: Mps, D_prime: int, m: Optional[int] = None):
    """Parameters and a seed -> ``[w_i]`` builder for one state (distinct offsets only)."""
    can = canonicalize(psi)
    eps = truncation_profile(can, D_prime).epsilon
    params = select_params(D_prime, eps, can.d, can.n)
    if m is not None:
        params = ConstructionParams(params.D_prime, params.b, m, can.d, can.n)
    groups = offset_groups(can, params)
    return params, groups, (lambda seed: build_ws(groups, params, seed))


# -- sweeps ------------------------------------------------------------------------

def error_curve(epsilon: float, D_prime: int) -> float:
    """``(epsilon * ln D')**(1/3)``, the shape of the local-error bound."""
    return float((epsilon * math.log(D_prime)) ** (1.0 / 3.0)) if D_prime > 1 else 0.0


CSV_HEADER = ("d_prime", "epsilon", "bond_dim", "max_error", "seed", "accepted")


@dataclass
class SweepResult:
    rows: list
    slope: Optional[float]
    curve_constant: Optional[float]
    reports: list = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([r["d_prime"], repr(r["epsilon"]), r["bond_dim"], repr(r["max_error"]), r["seed"], int(r["accepted"])])
        return buf.getvalue()

    def errors(self) -> list[float]:
        return [r["max_error"] for r in self.rows]


def envelope_constant(points: Sequence[tuple]) -> Optional[float]:
    """Smallest ``C`` with ``error <= C * curve`` over ``(curve, error)`` pairs with ``curve > 0``."""
    ratios = [e / c for c, e in points if c > 0 and np.isfinite(e)]
    return max(ratios) if ratios else None


def sweep(
    psi: Mps,
    grid: Sequence[int],
    widths: Sequence[int] = DEFAULT_WIDTHS,
    seed: int = 0,
    retry_budget: int = 8,
) -> SweepResult:
    """One construction per ``D'`` in ``grid``; failures become flagged rows.

    The retry threshold is 0.5 until two points have been measured and
    ``1.5 * C * (eps ln D')**(1/3)`` afterwards, with ``C`` the envelope
    constant of the points so far.
    """
    if not grid:
        raise DomainError("empty D' grid")
    can = canonicalize(psi)
    rows, reports, pts = [], [], []
    for dp in grid:
        C = envelope_constant(pts) if len(pts) >= 2 else None
        threshold = 0.5
        if C is not None:
            eps0 = truncation_profile(can, dp).epsilon
            threshold = max(1.5 * C * error_curve(eps0, dp), 1e-12)
        try:
            _, rep = construct(can, dp, seed=seed, widths=widths, retry_budget=retry_budget, threshold=threshold)
            row = dict(d_prime=int(dp), epsilon=rep.epsilon, bond_dim=rep.bond_dim_phi, max_error=rep.max_local_error, seed=int(seed), accepted=rep.accepted)
            pts.append((error_curve(rep.epsilon, dp), rep.max_local_error))
        except Exception as exc:  # a failing point must not abort the sweep
            rep = None
            row = dict(d_prime=int(dp), epsilon=float("nan"), bond_dim=0, max_error=float("nan"), seed=int(seed), accepted=False, failure=repr(exc))
        rows.append(row)
        reports.append(rep)
    good = [(r["d_prime"], r["max_error"]) for r in rows if np.isfinite(r["max_error"]) and r["max_error"] > 0]
    slope = fit_exponent(good).slope if len(good) >= 3 and len({x for x, _ in good}) > 1 else None
    return SweepResult(rows, slope, envelope_constant(pts), reports)
