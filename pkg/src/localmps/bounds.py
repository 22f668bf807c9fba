"""Bond-dimension budgets: exact inversion of the Renyi tail bound and asymptotic laws.

The asymptotic laws carry unknown constants. They are exposed as two fit
parameters, ``amplitude`` and ``log_power``, applied wherever a law hides a
constant or a polylogarithmic factor.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainError

#: Relative slack when testing ``bound(D) <= epsilon`` in floating point.
REL_TOL = 1e-12
_MAX_NUDGE = 8


def tail_bound_value(R_alpha: float, alpha: float, D: int) -> float:
    """``exp((1-alpha)/alpha * (R_alpha - ln D))``."""
    return math.exp((1.0 - alpha) / alpha * (R_alpha - math.log(D)))


def _satisfies(R_alpha: float, alpha: float, D: int, epsilon: float) -> bool:
    return tail_bound_value(R_alpha, alpha, D) <= epsilon * (1.0 + REL_TOL)


def invert_vc06(R_alpha: float, alpha: float, epsilon: float) -> int:
    """Smallest ``D`` whose Renyi tail bound is at most ``epsilon``.

    Closed form ``ceil(exp(R_alpha) * epsilon**(-alpha/(1-alpha)))``, then
    nudged by a few steps either way so the answer is minimal under the
    floating-point comparison used by :func:`_satisfies`. For very large
    ``D`` neighbouring budgets give bound values closer than ``REL_TOL`` and
    the closed form is returned as is.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if R_alpha < 0:
        raise DomainError(f"R_alpha must be non-negative, got {R_alpha}")
    log_x = R_alpha + alpha / (1.0 - alpha) * math.log(1.0 / epsilon)
    if log_x > 700:
        raise DomainError("required bond dimension overflows a float")
    D = max(math.ceil(math.exp(log_x)), 1)
    # the closed form is off by at most a step or two unless D is so large
    # that neighbours are indistinguishable at REL_TOL
    for _ in range(_MAX_NUDGE):
        if D > 1 and _satisfies(R_alpha, alpha, D - 1, epsilon):
            D -= 1
        elif not _satisfies(R_alpha, alpha, D, epsilon):
            D += 1
        else:
            break
    return D


LAW_TAGS = ("thm1_area", "thm2_gap", "thm_2d", "cor_2d_log", "cor_1d_log", "lemma_gap_rank")


@dataclass(frozen=True)
class ScalingLaw:
    """Predicted ``ln D`` as a function of the accuracy ``delta`` (or ``epsilon`` for ``lemma_gap_rank``).

    ``exponent`` is set for the polynomial laws ``D ~ delta**(-exponent)``.
    """

    tag: str
    params: dict = field(default_factory=dict)
    amplitude: float = 1.0
    log_power: float = 0.0

    @property
    def exponent(self) -> Optional[float]:
        alpha = self.params.get("alpha")
        if self.tag == "thm1_area":
            return 1.0 + 3.0 * alpha / (1.0 - alpha)
        if self.tag == "cor_1d_log":
            return 1.0 + 3.0 * alpha / (1.0 - alpha) + self.params["c_alpha"]
        return None

    def _polylog(self, x: float) -> float:
        return (1.0 + math.log1p(x)) ** self.log_power

    def log_D(self, delta: float) -> float:
        if not 0 < delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {delta}")
        return self.log_D_at(math.log(1.0 / delta))

    def log_D_at(self, L: float) -> float:
        """Same law in terms of ``L = ln(1/delta)``, usable far below float range of ``delta``."""
        if not L > 0:
            raise DomainError(f"L must be positive, got {L}")
        delta_inv = math.exp(L) if L < 700 else math.inf
        if self.tag in ("thm1_area", "cor_1d_log"):
            return math.log(self.amplitude) + self.exponent * L + self.log_power * math.log1p(L)
        if self.tag == "thm2_gap":
            x = (L**3 / self.params["gap"]) ** 0.25
            return self.amplitude * x * self._polylog(x) + L
        if self.tag == "lemma_gap_rank":
            x = 1.0 / self.params["gap"] + (L**3 / self.params["gap"]) ** 0.25
            return self.amplitude * x * self._polylog(x)
        if self.tag == "thm_2d":
            return self.amplitude * delta_inv
        if self.tag == "cor_2d_log":
            return self.amplitude * delta_inv * self._polylog(delta_inv)
        raise DomainError(f"unknown law {self.tag!r}")

    def to_csv(self, deltas: Sequence[float]) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("delta", "predicted_log_D"))
        for dl in deltas:
            writer.writerow((repr(float(dl)), repr(self.log_D(dl))))
        return buf.getvalue()


def scaling_law(tag: str, amplitude: float = 1.0, log_power: float = 0.0, **params) -> ScalingLaw:
    """Build a law after checking its parameters (``alpha``, ``gap``, ``c_alpha``)."""
    if tag not in LAW_TAGS:
        raise DomainError(f"unknown law {tag!r}; expected one of {LAW_TAGS}")
    needs = {
        "thm1_area": ("alpha",),
        "cor_1d_log": ("alpha", "c_alpha"),
        "thm2_gap": ("gap",),
        "lemma_gap_rank": ("gap",),
        "thm_2d": (),
        "cor_2d_log": (),
    }[tag]
    for key in needs:
        if key not in params:
            raise DomainError(f"law {tag} needs parameter {key!r}")
    if "alpha" in params and not 0 < params["alpha"] < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if "gap" in params and not params["gap"] > 0:
        raise DomainError("gap must be positive")
    if "c_alpha" in params and params["c_alpha"] < 0:
        raise DomainError("c_alpha must be non-negative")
    if amplitude <= 0 or log_power < 0:
        raise DomainError("amplitude must be positive and log_power non-negative")
    return ScalingLaw(tag, dict(params), float(amplitude), float(log_power))


class ExponentFit(NamedTuple):
    slope: float
    intercept: float
    residual: float


def fit_exponent(points: Sequence[tuple]) -> ExponentFit:
    """Least-squares line through ``(ln x, ln y)``; ``residual`` is the RMS misfit."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise DomainError("need at least three (x, y) pairs")
    if np.any(pts <= 0):
        raise DomainError("all coordinates must be positive")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise DomainError("x values are degenerate")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return ExponentFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))))
