"""Worst-case local-observable error between two states and the run report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .mps import Mps, all_window_rdms, canonicalize
from .tensor_core import trace_norm_hermitian


def trace_distance(rho, sigma) -> float:
    """Unnormalized Schatten-1 distance ``||rho - sigma||_1`` (in ``[0, 2]`` for states).

    Equals ``sup |tr O (rho - sigma)|`` over Hermitian ``O`` with ``||O|| <= 1``.
    """
    return trace_norm_hermitian(np.asarray(rho) - np.asarray(sigma))


def max_local_error(psi: Mps, phi: Mps, width: int) -> tuple[float, list]:
    """Largest trace distance between width-``width`` reduced states of ``psi`` and ``phi``.

    Returns ``(max_error, [(start, width, error), ...])`` with 0-based starts.
    """
    if psi.n != phi.n or psi.d != phi.d:
        raise ShapeError("states live on different chains")
    a = all_window_rdms(canonicalize(psi), width)
    b = all_window_rdms(canonicalize(phi), width)
    per = [(s, width, trace_distance(x, y)) for s, (x, y) in enumerate(zip(a, b))]
    return max(e for _, _, e in per), per


def max_local_error_multi(psi: Mps, phi: Mps, widths: Sequence[int]) -> tuple[float, list]:
    psi_c, phi_c = canonicalize(psi), canonicalize(phi)
    per = []
    for w in widths:
        if w <= psi.n:
            per.extend(max_local_error(psi_c, phi_c, w)[1])
    return max(e for _, _, e in per), per


@dataclass
class ApproxReport:
    """Outcome of one construction run.

    ``metadata`` holds run-dependent values such as timestamps and is the only
    field excluded from determinism comparisons. ``exact_shortcut`` marks runs
    where truncation was lossless and ``psi`` itself was returned.
    """

    d_prime: int
    b: int
    m: int
    M: int
    epsilon: float
    bond_dim_phi: int
    max_local_error: float
    per_window_errors: list
    seeds: dict
    attempts: int
    accepted: bool
    bond_dim_compressed: int = 0
    attempt_errors: list = field(default_factory=list)
    threshold: float = 0.5
    exact_shortcut: bool = False
    widths: list = field(default_factory=lambda: [1, 2, 3])
    provenance: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_dict(self, include_metadata: bool = True) -> dict:
        out = asdict(self)
        out["per_window_errors"] = [list(x) for x in self.per_window_errors]
        if not include_metadata:
            out.pop("metadata")
        return out

    def to_json(self, include_metadata: bool = True) -> str:
        return json.dumps(self.to_dict(include_metadata), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ApproxReport":
        data = json.loads(text)
        data["per_window_errors"] = [tuple(x) for x in data["per_window_errors"]]
        return cls(**data)
