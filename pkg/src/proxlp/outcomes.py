"""Result records shared by the oracles and the top-level algorithms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .subspace import LiftingCertificate


@dataclass(frozen=True)
class Lifting:
    cert: LiftingCertificate


@dataclass(frozen=True)
class FarkasPrimal:
    """s ∈ W⊥, s ≥ 0, ⟨d, s⟩ < 0: the primal side is infeasible."""
    s: np.ndarray


@dataclass(frozen=True)
class FarkasDual:
    """x ∈ W, x ≥ 0, ⟨c, x⟩ < 0: the dual side is infeasible."""
    x: np.ndarray


@dataclass(frozen=True)
class NearFeasible:
    x: np.ndarray


@dataclass(frozen=True)
class NearOptimal:
    x: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class ProxFeasPoint:
    x: np.ndarray


@dataclass(frozen=True)
class ProxOptPoint:
    x: np.ndarray
    s: np.ndarray
    c_tilde: np.ndarray


@dataclass(frozen=True)
class Feasible:
    x: np.ndarray


@dataclass(frozen=True)
class PerturbedOptimum:
    d_tilde: np.ndarray
    x: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class Optimal:
    x: np.ndarray
    s: np.ndarray


Certificate = Lifting | FarkasPrimal | FarkasDual


@dataclass
class Trace:
    """Counters collected during one solve."""
    oracle_calls: int = 0
    solver_calls: int = 0
    ipm_iterations: int = 0
    max_feas_depth: int = 0
    outer_iterations: int = 0
    max_inner_depth: int = 0
    eps_values: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def note(self, msg: str):
        self.events.append(msg)
