"""Ground-truth solvers the distributed algorithm is validated against:
a closed-form stationarity solve for quadratic instances and a centralized
gradient flow that uses the exact aggregate at every step."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrate import DivergenceError, ensure_finite, rk4_step
from .problems import AggregativeProblem, global_gradient

__all__ = [
    "CentralizedTrajectory",
    "solve_kkt_quadratic",
    "centralized_flow",
    "fit_decay_rate",
    "DivergenceError",
]


@dataclass
class CentralizedTrajectory:
    times: np.ndarray  # (K,)
    x: np.ndarray      # (K, n)

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]


def solve_kkt_quadratic(problem: AggregativeProblem, residual_tol: float = 1e-8) -> np.ndarray:
    """Unique minimizer of a strictly convex quadratic instance.

    The gradient of a quadratic cost is affine, so probing it at the basis
    vectors recovers the exact Hessian: H[:, j] = grad(e_j) - grad(0). The
    minimizer solves H x = -grad(0). Raises ValueError when the instance is
    not strictly convex or not quadratic (stationarity residual check).
    """
    n = problem.dim
    g0 = global_gradient(problem, np.zeros(n))
    hess = np.empty((n, n))
    basis = np.zeros(n)
    for j in range(n):
        basis[j] = 1.0
        hess[:, j] = global_gradient(problem, basis) - g0
        basis[j] = 0.0
    hess = 0.5 * (hess + hess.T)
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        raise ValueError("instance is not strictly convex: Hessian is not positive definite")
    x_star = np.linalg.solve(hess, -g0)
    residual = float(np.linalg.norm(global_gradient(problem, x_star)))
    if residual > residual_tol:
        raise ValueError(
            f"stationarity residual {residual:.3e} exceeds {residual_tol:.1e}; "
            "cost does not look quadratic"
        )
    return x_star


def centralized_flow(
    problem: AggregativeProblem,
    x0: np.ndarray,
    h: float,
    t_end: float,
    grad_tol: float = 1e-8,
    stride: int = 1,
) -> CentralizedTrajectory:
    """Integrate x' = -grad f(x) with fixed 4th-order steps.

    Stops early once the gradient norm drops to ``grad_tol``. The aggregate
    entering every agent's gradient is recomputed exactly at each stage, so
    this is the coordinator baseline the distributed runs are compared to.
    """
    if h <= 0 or t_end <= 0:
        raise ValueError("h and t_end must be positive")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (problem.dim,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({problem.dim},)")

    def rhs(t: float, state: np.ndarray) -> np.ndarray:
        return -global_gradient(problem, state)

    n_steps = max(1, int(round(t_end / h)))
    times = [0.0]
    states = [x.copy()]
    for k in range(n_steps):
        t = k * h
        x = rk4_step(rhs, t, x, h)
        ensure_finite(x, t + h, h)
        if (k + 1) % stride == 0:
            times.append((k + 1) * h)
            states.append(x.copy())
        if np.linalg.norm(global_gradient(problem, x)) <= grad_tol:
            if (k + 1) % stride != 0:
                times.append((k + 1) * h)
                states.append(x.copy())
            break
    return CentralizedTrajectory(times=np.array(times), x=np.array(states))


def fit_decay_rate(times: np.ndarray, errors: np.ndarray, floor: float = 1e-10) -> float:
    """Least-squares decay rate of an error series.

    Fits log(e) against t over the points with e > floor (non-positive
    entries are dropped) and returns the negated slope, so a decaying
    series yields a positive rate. Needs at least 10 usable points.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if times.shape != errors.shape:
        raise ValueError("times and errors must have matching shapes")
    mask = np.isfinite(errors) & (errors > floor)
    if int(mask.sum()) < 10:
        raise ValueError("fewer than 10 usable points above the error floor")
    slope = np.polyfit(times[mask], np.log(errors[mask]), 1)[0]
    return float(-slope)
