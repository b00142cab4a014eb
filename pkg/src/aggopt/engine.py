"""Closed-loop simulation of the distributed algorithm.

Each agent steers its decision with estimator feedback,

    x_i' = -grad_x f_i(x_i, eta_i1) - jac_phi_i(x_i)^T eta_i2,

while the PI consensus estimator runs on the fast time scale 1/delta and
exchanges information only through last-broadcast values. One fixed-step
loop advances everything:

  1. at each grid time, evaluate every agent's trigger; agents that fire
     overwrite their broadcast with the current state (the error resets);
  2. advance (x, eta, w) one 4th-order step with broadcasts held constant;
  3. record every ``output_stride``-th grid point.

Triggers are evaluated at grid points only, so detected event times are
late by at most h; all agents broadcast at t = 0. Identical configurations
produce bit-identical results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .consensus import (
    estimator_derivative,
    initial_estimator_state,
    theta_stack,
)
from .graphs import Graph, lambda_bound, laplacian
from .integrate import DivergenceError, ensure_finite, rk4_step
from .oracles import fit_decay_rate, solve_kkt_quadratic
from .problems import AggregativeProblem, _der_arrays
from .triggers import Continuous, Event, EventLog, Periodic, TriggerScheme, validate_scheme

__all__ = [
    "SimConfig",
    "SimMetrics",
    "SimResult",
    "closed_loop_derivative",
    "decision_rates",
    "run",
    "consensus_error",
    "DivergenceError",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    """One closed-loop run.

    State layout used by the integrator is the flat vector
    ``[x (n) | eta row-major (2 m N) | w row-major (2 m N)]``.
    """

    problem: AggregativeProblem
    graph: Graph
    delta: float
    h: float
    t_end: float
    x0: np.ndarray
    schemes: tuple[TriggerScheme, ...]
    output_stride: int = 1

    def __post_init__(self) -> None:
        if self.graph.n_nodes != self.problem.n_agents:
            raise ValueError(
                f"graph has {self.graph.n_nodes} nodes but the problem has "
                f"{self.problem.n_agents} agents"
            )
        if self.delta <= 0 or self.h <= 0 or self.t_end <= 0:
            raise ValueError("delta, h, and t_end must be positive")
        if len(self.schemes) != self.problem.n_agents:
            raise ValueError("one trigger scheme per agent is required")
        if self.output_stride < 1:
            raise ValueError("output_stride must be a positive integer")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.problem.dim,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({self.problem.dim},)")


@dataclass
class SimMetrics:
    final_x: np.ndarray
    x_star: np.ndarray | None
    relative_error: float | None
    decision_error: np.ndarray | None   # per recorded sample
    consensus_error: np.ndarray         # per recorded sample
    fitted_decay_rate: float | None
    broadcast_counts: np.ndarray
    min_interevent: np.ndarray
    lambda_bound: float
    scheme_warnings: tuple[str, ...]


@dataclass
class SimResult:
    times: np.ndarray        # (K,)
    x: np.ndarray            # (K, n)
    eta: np.ndarray          # (K, N, 2m)
    w: np.ndarray            # (K, N, 2m)
    eta_hat: np.ndarray      # (K, N, 2m)
    w_hat: np.ndarray        # (K, N, 2m)
    events: EventLog
    metrics: SimMetrics


def decision_rates(
    problem: AggregativeProblem, x: np.ndarray, eta1: np.ndarray, eta2: np.ndarray
) -> np.ndarray:
    """Stacked decision derivatives driven by the agents' own estimates."""
    dp = problem.der_params
    if dp is not None:
        a, b, _ = _der_arrays(dp)
        grad = 2.0 * a * x + b - dp.price_intercept + dp.price_slope * eta1[:, 0]
        return -(grad + eta2[:, 0])
    parts = []
    for i, (obj, x_i) in enumerate(zip(problem.agents, problem.blocks(x))):
        parts.append(-(obj.grad_x(x_i, eta1[i]) + obj.jac_phi(x_i).T @ eta2[i]))
    return np.concatenate(parts)


def closed_loop_derivative(
    problem: AggregativeProblem,
    lap: np.ndarray,
    delta: float,
    x: np.ndarray,
    eta: np.ndarray,
    w: np.ndarray,
    eta_hat: np.ndarray,
    w_hat: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Derivatives of (x, eta, w) with broadcasts held fixed."""
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(eta)) and np.all(np.isfinite(w))):
        raise ValueError("non-finite state passed to the closed-loop derivative")
    m = problem.m
    eta1, eta2 = eta[:, :m], eta[:, m:]
    x_dot = decision_rates(problem, x, eta1, eta2)
    thetas = theta_stack(problem, x, eta1)
    eta_dot, w_dot = estimator_derivative(lap, eta, w, eta_hat, w_hat, thetas, delta)
    return x_dot, eta_dot, w_dot


_CONTINUOUS, _PERIODIC, _EVENT = 0, 1, 2


def run(cfg: SimConfig, x_star: np.ndarray | None = None) -> SimResult:
    """Execute one closed-loop run; see the module docstring for semantics.

    ``x_star`` may be supplied to skip the oracle solve; when omitted the
    quadratic stationarity solver is attempted and decision-error metrics
    are dropped if the instance is not quadratic.
    """
    problem, g = cfg.problem, cfg.graph
    n_agents, m, n = problem.n_agents, problem.m, problem.dim
    two_m = 2 * m
    lap = laplacian(g)
    lam = lambda_bound(lap)
    report = validate_scheme(cfg.schemes, lam)
    for msg in report.warnings:
        logger.warning(msg)
    if cfg.h > cfg.delta / 10.0:
        logger.warning(
            "step h=%g exceeds delta/10=%g; the fast subsystem may be under-resolved",
            cfg.h, cfg.delta / 10.0,
        )

    x0 = np.asarray(cfg.x0, dtype=float)
    state = initial_estimator_state(problem, x0)
    eta_hat, w_hat = state.eta_hat, state.w_hat
    h, delta, stride = cfg.h, cfg.delta, cfg.output_stride
    n_steps = max(1, int(round(cfg.t_end / h)))

    # Per-agent scheme tables for the vectorized trigger pass.
    kinds = np.empty(n_agents, dtype=int)
    beta1 = np.zeros(n_agents)
    beta2 = np.zeros(n_agents)
    period = np.full(n_agents, np.inf)
    for i, scheme in enumerate(cfg.schemes):
        if isinstance(scheme, Continuous):
            kinds[i] = _CONTINUOUS
        elif isinstance(scheme, Periodic):
            kinds[i] = _PERIODIC
            period[i] = scheme.period
        elif isinstance(scheme, Event):
            kinds[i] = _EVENT
            beta1[i] = scheme.beta1
            beta2[i] = scheme.beta2
        else:
            raise TypeError(f"unknown trigger scheme {scheme!r}")
    next_due = period.copy()  # every agent already broadcast at t = 0
    event_times: list[list[float]] = [[0.0] for _ in range(n_agents)]

    y = np.concatenate([x0, state.eta.ravel(), state.w.ravel()])

    def rhs(t: float, flat: np.ndarray) -> np.ndarray:
        x_ = flat[:n]
        eta_ = flat[n : n + two_m * n_agents].reshape(n_agents, two_m)
        w_ = flat[n + two_m * n_agents :].reshape(n_agents, two_m)
        eta1 = eta_[:, :m]
        x_dot = decision_rates(problem, x_, eta1, eta_[:, m:])
        thetas = theta_stack(problem, x_, eta1)
        eta_dot, w_dot = estimator_derivative(lap, eta_, w_, eta_hat, w_hat, thetas, delta)
        return np.concatenate([x_dot, eta_dot.ravel(), w_dot.ravel()])

    n_records = n_steps // stride + 1
    rec_t = np.empty(n_records)
    rec_x = np.empty((n_records, n))
    rec_eta = np.empty((n_records, n_agents, two_m))
    rec_w = np.empty((n_records, n_agents, two_m))
    rec_eta_hat = np.empty((n_records, n_agents, two_m))
    rec_w_hat = np.empty((n_records, n_agents, two_m))

    def record(slot: int, t: float, flat: np.ndarray) -> None:
        rec_t[slot] = t
        rec_x[slot] = flat[:n]
        rec_eta[slot] = flat[n : n + two_m * n_agents].reshape(n_agents, two_m)
        rec_w[slot] = flat[n + two_m * n_agents :].reshape(n_agents, two_m)
        rec_eta_hat[slot] = eta_hat
        rec_w_hat[slot] = w_hat

    record(0, 0.0, y)
    mask = np.empty(n_agents, dtype=bool)
    for k in range(n_steps):
        t = k * h
        if k > 0:
            eta_now = y[n : n + two_m * n_agents].reshape(n_agents, two_m)
            w_now = y[n + two_m * n_agents :].reshape(n_agents, two_m)
            err = np.linalg.norm(
                np.concatenate([eta_hat - eta_now, w_hat - w_now], axis=1), axis=1
            )
            mask[:] = kinds == _CONTINUOUS
            due = (kinds == _PERIODIC) & (t >= next_due - 1e-9)
            mask |= due
            next_due[due] += period[due]
            mask |= (kinds == _EVENT) & (err >= beta1 * np.exp(-beta2 * t))
            if mask.any():
                eta_hat[mask] = eta_now[mask]
                w_hat[mask] = w_now[mask]
                for i in np.flatnonzero(mask):
                    event_times[i].append(t)
        y = rk4_step(rhs, t, y, h)
        ensure_finite(y, t + h, h)
        if (k + 1) % stride == 0:
            record((k + 1) // stride, (k + 1) * h, y)

    events = EventLog(times=tuple(np.array(ts) for ts in event_times))
    final_x = y[:n].copy()

    if x_star is None:
        try:
            x_star = solve_kkt_quadratic(problem)
        except ValueError:
            x_star = None
    decision_error = None
    relative_error = None
    fitted = None
    if x_star is not None:
        decision_error = np.linalg.norm(rec_x - x_star, axis=1)
        relative_error = float(np.linalg.norm(final_x - x_star) / np.linalg.norm(x_star))
        try:
            fitted = fit_decay_rate(rec_t, decision_error)
        except ValueError:
            fitted = None

    metrics = SimMetrics(
        final_x=final_x,
        x_star=x_star,
        relative_error=relative_error,
        decision_error=decision_error,
        consensus_error=consensus_error(problem, rec_x, rec_eta),
        fitted_decay_rate=fitted,
        broadcast_counts=events.counts,
        min_interevent=events.min_intervals(),
        lambda_bound=lam,
        scheme_warnings=report.warnings,
    )
    return SimResult(
        times=rec_t, x=rec_x, eta=rec_eta, w=rec_w,
        eta_hat=rec_eta_hat, w_hat=rec_w_hat, events=events, metrics=metrics,
    )


def consensus_error(
    problem: AggregativeProblem, x_samples: np.ndarray, eta_samples: np.ndarray
) -> np.ndarray:
    """max_i ||eta_i(t) - mean_j Theta_j(t)|| for every sample."""
    m = problem.m
    n_samples = x_samples.shape[0]
    out = np.empty(n_samples)
    for k in range(n_samples):
        thetas = theta_stack(problem, x_samples[k], eta_samples[k][:, :m])
        target = thetas.mean(axis=0)
        out[k] = float(np.linalg.norm(eta_samples[k] - target, axis=1).max())
    return out
