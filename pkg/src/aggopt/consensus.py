"""Proportional-integral dynamic average consensus estimator.

Each agent runs a 2m-dimensional estimate eta_i = (eta_i1, eta_i2) of the
pair (network aggregate, network-average aggregate-sensitivity), driven by
its local signal Theta_i = (phi_i(x_i), grad_sigma f_i(x_i, eta_i1)) and by
neighbor coupling through *last-broadcast* values. w_i is the integral
state that removes steady-state consensus error.

The sensitivity block of Theta_i is evaluated at the agent's own aggregate
estimate eta_i1, since the true aggregate is not locally available. For the
dispatch family the sensitivity does not depend on the aggregate, so the
choice is invisible there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, laplacian
from .problems import AggregativeProblem, LocalObjective, sigma

__all__ = [
    "EstimatorState",
    "theta",
    "theta_stack",
    "initial_estimator_state",
    "estimator_derivative",
    "equilibrium_residual",
    "build_equilibrium",
]


@dataclass
class EstimatorState:
    """Estimator variables for the whole network; row i belongs to agent i.

    ``eta`` rows stack the aggregate estimate (first m entries) and the
    sensitivity-average estimate (last m). ``eta_hat``/``w_hat`` hold each
    agent's last broadcast and stay constant between that agent's events;
    at an event they are overwritten with the current row, which resets the
    agent's measurement error to zero.
    """

    eta: np.ndarray             # (N, 2m)
    w: np.ndarray               # (N, 2m)
    eta_hat: np.ndarray         # (N, 2m)
    w_hat: np.ndarray           # (N, 2m)
    last_trigger_time: np.ndarray  # (N,)


def theta(obj: LocalObjective, x_i: np.ndarray, eta_i1: np.ndarray) -> np.ndarray:
    """Local estimator input: phi_i(x_i) stacked over grad_sigma f_i(x_i, eta_i1)."""
    x_i = np.asarray(x_i, dtype=float)
    eta_i1 = np.asarray(eta_i1, dtype=float)
    top = obj.phi(x_i)
    bottom = obj.grad_sigma(x_i, eta_i1)
    if top.shape != bottom.shape:
        raise ValueError("phi and grad_sigma must both return m-vectors")
    return np.concatenate([top, bottom])


def theta_stack(problem: AggregativeProblem, x: np.ndarray, eta1: np.ndarray) -> np.ndarray:
    """All agents' estimator inputs as an (N, 2m) array."""
    if problem.der_params is not None:
        return np.column_stack((x, problem.der_params.price_slope * x))
    rows = [
        theta(obj, x_i, eta1[i])
        for i, (obj, x_i) in enumerate(zip(problem.agents, problem.blocks(x)))
    ]
    return np.vstack(rows)


def initial_estimator_state(problem: AggregativeProblem, x0: np.ndarray) -> EstimatorState:
    """Deterministic initialization: eta_i = Theta_i(x_i(0), 0), w = 0.

    Every agent broadcasts at t = 0, so the initial hats equal the states
    and all measurement errors start at zero.
    """
    x0 = np.asarray(x0, dtype=float)
    n_agents = problem.n_agents
    zeros_m = np.zeros((n_agents, problem.m))
    eta = theta_stack(problem, x0, zeros_m)
    w = np.zeros_like(eta)
    return EstimatorState(
        eta=eta,
        w=w,
        eta_hat=eta.copy(),
        w_hat=w.copy(),
        last_trigger_time=np.zeros(n_agents),
    )


def estimator_derivative(
    lap: np.ndarray,
    eta: np.ndarray,
    w: np.ndarray,
    eta_hat: np.ndarray,
    w_hat: np.ndarray,
    thetas: np.ndarray,
    delta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (eta_dot, w_dot) of the PI estimator.

    delta * eta_dot_i = -eta_i - sum_j in N_i (hat_eta_i - hat_eta_j)
                        - sum_j in N_i (hat_w_i - hat_w_j) + Theta_i
    delta * w_dot_i   =  sum_j in N_i (hat_eta_i - hat_eta_j)

    The neighbor sums use broadcast values only, never true states; with L
    the graph Laplacian they are the rows of L @ hats.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    coupling_eta = lap @ eta_hat
    coupling_w = lap @ w_hat
    eta_dot = (-eta - coupling_eta - coupling_w + thetas) / delta
    w_dot = coupling_eta / delta
    return eta_dot, w_dot


def equilibrium_residual(
    problem: AggregativeProblem,
    g: Graph,
    x: np.ndarray,
    eta: np.ndarray,
    w: np.ndarray,
) -> float:
    """How far (x, eta, w) is from a closed-loop equilibrium.

    Max Euclidean norm over three stacked residuals, with broadcast errors
    taken as zero (they vanish at any equilibrium):

      (a) stationarity driven by the estimates:
          grad_x f_i(x_i, eta_i1) + jac_phi_i(x_i)^T eta_i2 for each i,
      (b) estimator balance: -eta - L eta - L w + Theta(x, eta1),
      (c) estimate consensus: L eta.
    """
    x = np.asarray(x, dtype=float)
    m = problem.m
    lap = laplacian(g)
    eta1 = eta[:, :m]
    eta2 = eta[:, m:]
    parts = []
    for i, (obj, x_i) in enumerate(zip(problem.agents, problem.blocks(x))):
        parts.append(obj.grad_x(x_i, eta1[i]) + obj.jac_phi(x_i).T @ eta2[i])
    res_x = np.concatenate(parts)
    thetas = theta_stack(problem, x, eta1)
    res_eta = -eta - lap @ eta - lap @ w + thetas
    res_w = lap @ eta
    return float(
        max(
            np.linalg.norm(res_x),
            np.linalg.norm(res_eta.ravel()),
            np.linalg.norm(res_w.ravel()),
        )
    )


def build_equilibrium(
    problem: AggregativeProblem, g: Graph, x_star: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Construct estimator equilibrium values matching a decision optimum.

    Every eta_i is the network mean of the Theta_j evaluated at x_star with
    the converged aggregate; w solves L w = Theta - eta, which is consistent
    because the right side sums to zero over agents, and is underdetermined
    along the consensus direction, so the minimum-norm solution is returned.
    """
    x_star = np.asarray(x_star, dtype=float)
    s = sigma(problem, x_star)
    eta1 = np.tile(s, (problem.n_agents, 1))
    thetas = theta_stack(problem, x_star, eta1)
    eta_star = np.tile(thetas.mean(axis=0), (problem.n_agents, 1))
    lap = laplacian(g)
    rhs = thetas - eta_star
    w_star = np.linalg.lstsq(lap, rhs, rcond=None)[0]
    return eta_star, w_star
