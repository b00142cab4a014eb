"""Communication scheduling: when does an agent rebroadcast its estimator
state to its neighbors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .consensus import EstimatorState

__all__ = [
    "Continuous",
    "Periodic",
    "Event",
    "TriggerScheme",
    "EventLog",
    "SchemeValidation",
    "measurement_error",
    "threshold",
    "should_trigger",
    "zeno_lower_bound",
    "validate_scheme",
    "zeno_bound_constants",
]


@dataclass(frozen=True)
class Continuous:
    """Broadcast at every integration grid point."""


@dataclass(frozen=True)
class Periodic:
    """Broadcast every ``period`` time units."""

    period: float


@dataclass(frozen=True)
class Event:
    """Broadcast when the measurement error reaches beta1 * exp(-beta2 * t).

    t is absolute simulation time, not time since the last event.
    """

    beta1: float
    beta2: float


TriggerScheme = Union[Continuous, Periodic, Event]


@dataclass(frozen=True)
class EventLog:
    """Per-agent broadcast instants, strictly increasing within each agent."""

    times: tuple[np.ndarray, ...]

    @property
    def counts(self) -> np.ndarray:
        return np.array([t.size for t in self.times])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def min_intervals(self) -> np.ndarray:
        """Smallest gap between consecutive events per agent (inf if < 2 events)."""
        out = np.full(len(self.times), np.inf)
        for i, t in enumerate(self.times):
            if t.size >= 2:
                out[i] = float(np.diff(t).min())
        return out


def measurement_error(state: EstimatorState) -> np.ndarray:
    """Per-agent norm of the stacked broadcast-minus-true vector."""
    diff = np.concatenate([state.eta_hat - state.eta, state.w_hat - state.w], axis=1)
    return np.linalg.norm(diff, axis=1)


def threshold(t: float, beta1: float, beta2: float) -> float:
    return beta1 * math.exp(-beta2 * t)


def should_trigger(e_norm: float, t: float, beta1: float, beta2: float) -> bool:
    """Inclusive comparison against the decaying threshold."""
    return bool(e_norm >= threshold(t, beta1, beta2))


def zeno_lower_bound(m1: float, m2: float, beta1: float, beta2: float, tol: float = 1e-12) -> float:
    """Unique root T of (m1 + m2) T = beta1 exp(-beta2 T).

    T lower-bounds the gap between consecutive events when m1 + m2 bounds
    the growth rate of the measurement error, which is why a positive root
    rules out accumulation of events in finite time. Solved by bisection on
    [0, beta1 / (m1 + m2)] to absolute tolerance ``tol``.
    """
    total = m1 + m2
    if total <= 0:
        raise ValueError("m1 + m2 must be positive; no bound is defined otherwise")
    if beta1 <= 0 or beta2 < 0:
        raise ValueError("beta1 must be positive and beta2 nonnegative")
    lo, hi = 0.0, beta1 / total
    # g(lo) = -beta1 < 0, g(hi) >= 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if total * mid - beta1 * math.exp(-beta2 * mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SchemeValidation:
    """Outcome of checking trigger parameters against the spectral bound."""

    passed: bool
    lam: float
    warnings: tuple[str, ...]


def validate_scheme(schemes: Sequence[TriggerScheme], lam: float) -> SchemeValidation:
    """Check per-agent trigger parameters.

    Nonpositive beta or period values are hard errors. An event decay rate
    beta2 >= lam only voids the convergence guarantee, so it produces a
    warning and the run stays permitted.
    """
    warnings: list[str] = []
    passed = True
    for i, scheme in enumerate(schemes):
        if isinstance(scheme, Periodic):
            if scheme.period <= 0:
                raise ValueError(f"agent {i}: period must be positive")
        elif isinstance(scheme, Event):
            if scheme.beta1 <= 0 or scheme.beta2 <= 0:
                raise ValueError(f"agent {i}: beta1 and beta2 must be positive")
            if scheme.beta2 >= lam:
                passed = False
                warnings.append(
                    f"agent {i}: beta2={scheme.beta2:g} is not below the spectral "
                    f"bound {lam:g}; estimator convergence is no longer guaranteed"
                )
    return SchemeValidation(passed=passed, lam=lam, warnings=tuple(warnings))


def zeno_bound_constants(
    lap: np.ndarray,
    m: int,
    initial_deviation: float,
    beta1_max: float,
    beta2_min: float,
    lam: float,
) -> tuple[float, float]:
    """Conservative (m1, m2) for :func:`zeno_lower_bound`.

    Bounds the estimator-error growth rate by m1 exp(-lam t) + m2 exp(-beta2 t)
    using the spectral norms of the unreduced coupling matrices of the fast
    subsystem (upper bounds for the reduced-system norms), the initial
    deviation of (eta, w) from its steady state, and the extreme trigger
    parameters across agents. Requires beta2_min < lam. The sum m1 + m2 is
    always positive, so the resulting inter-event bound exists.
    """
    if beta2_min >= lam:
        raise ValueError("requires beta2_min < lam")
    n = lap.shape[0]
    eye_block = np.eye(2 * m)
    lap2 = np.kron(lap, eye_block)
    zero = np.zeros_like(lap2)
    drift = np.block([[-np.eye(2 * m * n) - lap2, -lap2], [lap2, zero]])
    inject = np.block([[-lap2, -lap2], [lap2, zero]])
    drift_norm = float(np.linalg.norm(drift, 2))
    inject_norm = float(np.linalg.norm(inject, 2))
    scale = math.sqrt(n) * beta1_max * inject_norm
    m1 = drift_norm * initial_deviation - drift_norm * scale / (lam - beta2_min)
    m2 = scale * (1.0 + drift_norm / (lam - beta2_min))
    return m1, m2
