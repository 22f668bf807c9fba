"""Entropies of Schmidt spectra, truncation-error profiles and the Renyi tail bound."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mps import Mps, SchmidtSpectrum, canonicalize

#: Slack allowed when comparing a truncation tail to its Renyi bound.
TOL_BOUND = 1e-12


def _weights(spectrum) -> np.ndarray:
    if isinstance(spectrum, SchmidtSpectrum):
        p = spectrum.weights
    else:
        p = np.asarray(spectrum, dtype=float) ** 2
    return p[p > 0]


def entropy(spectrum, alpha: float) -> float:
    """Renyi entropy in nats of the Schmidt weights ``lambda**2``.

    ``alpha == 1`` gives the von Neumann entropy. ``spectrum`` is either a
    :class:`SchmidtSpectrum` or an array of Schmidt coefficients (not squared).
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    p = _weights(spectrum)
    if alpha == 1:
        return float(max(-np.sum(p * np.log(p)), 0.0))
    return float(max(np.log(np.sum(p**alpha)) / (1.0 - alpha), 0.0))


@dataclass(frozen=True)
class EntropyProfile:
    alpha: float
    per_cut: tuple  # ((cut, entropy), ...)

    @property
    def max_entropy(self) -> float:
        return max((e for _, e in self.per_cut), default=0.0)

    def to_csv(self) -> str:
        return _rows_to_csv(("cut", "entropy"), self.per_cut)


@dataclass(frozen=True)
class TruncationProfile:
    D_prime: int
    per_cut_tail: tuple  # ((cut, discarded weight), ...)

    @property
    def epsilon(self) -> float:
        return max((t for _, t in self.per_cut_tail), default=0.0)

    def tail(self, cut: int) -> float:
        return self.per_cut_tail[cut - 1][1]

    def to_csv(self) -> str:
        return _rows_to_csv(("cut", "tail"), self.per_cut_tail)


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for cut, val in rows:
        writer.writerow([cut, repr(float(val))])
    return buf.getvalue()


def tail_weight(spectrum, D: int) -> float:
    """Discarded weight ``sum_{j > D} lambda_j**2``."""
    p = np.sort(_weights(spectrum))[::-1]
    return float(np.sum(p[D:]))


def entropy_profile(state: Mps, alpha: float) -> EntropyProfile:
    spectra = canonicalize(state).spectra()
    return EntropyProfile(alpha, tuple((s.cut, entropy(s, alpha)) for s in spectra))


def truncation_profile(state: Mps, D_prime: int) -> TruncationProfile:
    """Per-cut discarded weight beyond the ``D_prime`` largest Schmidt values.

    The maximum over cuts is the truncation error ``epsilon``.
    """
    if D_prime < 1:
        raise DomainError(f"D_prime must be >= 1, got {D_prime}")
    spectra = canonicalize(state).spectra()
    return TruncationProfile(int(D_prime), tuple((s.cut, tail_weight(s, D_prime)) for s in spectra))


@dataclass(frozen=True)
class TailBoundCheck:
    tail: float
    bound: float
    holds: bool


def renyi_tail_bound(spectrum, alpha: float, D: int) -> TailBoundCheck:
    """Compare the discarded weight beyond ``D`` with ``exp((1-a)/a (R_a - ln D))``.

    The bound is a theorem for ``0 < alpha < 1``, so ``holds`` is expected to
    be true for every input; it is computed, never assumed.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if D < 1:
        raise DomainError(f"D must be >= 1, got {D}")
    tail = tail_weight(spectrum, D)
    r_alpha = entropy(spectrum, alpha)
    bound = float(np.exp((1.0 - alpha) / alpha * (r_alpha - np.log(D))))
    return TailBoundCheck(tail, bound, bool(tail <= bound + TOL_BOUND))


vc06_tail_bound = renyi_tail_bound


def random_spectrum(rng: np.random.Generator, max_len: int = 64) -> np.ndarray:
    """Random descending Schmidt coefficients with varied decay profiles."""
    length = int(rng.integers(1, max_len + 1))
    kind = rng.integers(0, 4)
    if kind == 0:
        w = rng.random(length)
    elif kind == 1:
        w = np.exp(-rng.uniform(0.05, 3.0) * np.arange(length))
    elif kind == 2:
        w = (1.0 + np.arange(length)) ** (-rng.uniform(0.5, 4.0))
    else:
        w = rng.dirichlet(np.full(length, rng.uniform(0.05, 2.0)))
        w = np.maximum(w, 1e-300)
    w = np.sort(w)[::-1]
    return np.sqrt(w / np.sum(w))

