"""Aggregative optimization instances.

Each agent i owns a decision x_i and a local objective f_i(x_i, s) that also
depends on the network aggregate s = sigma(x) = (1/N) sum_j phi_j(x_j). The
global cost is sum_i f_i(x_i, sigma(x)). Two factories build the
price-anticipating dispatch family, where unit i pays a quadratic generation
cost and sells at a price that falls linearly with the average output:

    f_i(x_i, s) = a_i x_i^2 + b_i x_i + d_i - (c0 - c1 * s) * x_i

with price intercept c0 and slope c1. For that family the global cost is a
strictly convex quadratic whose Hessian is ``2 diag(a) + (2 c1 / N) ones``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "LocalObjective",
    "DerParameters",
    "AggregativeProblem",
    "sigma",
    "global_cost",
    "global_gradient",
    "quadratic_hessian",
    "from_der_parameters",
    "make_der_instance",
    "make_dispatch_instance",
    "with_frozen_decisions",
    "DER4_PUBLISHED_SOLUTION",
]

Vector = np.ndarray

# Operating point published for the four-unit preset alongside its
# coefficients. It does not satisfy the stationarity condition of those
# coefficients; solvers here report the computed optimum and carry this
# value only for comparison in summary records.
DER4_PUBLISHED_SOLUTION = (188.0, 377.5, 236.2, 266.9)


@dataclass(frozen=True)
class LocalObjective:
    """One agent's objective, aggregation map, and analytic derivatives.

    All callables take/return numpy vectors: ``cost(x_i, s)`` is scalar,
    ``grad_x`` has dim_x entries, ``grad_sigma`` has m entries, ``phi``
    maps dim_x -> m, and ``jac_phi`` returns the (m, dim_x) Jacobian.
    """

    dim_x: int
    cost: Callable[[Vector, Vector], float]
    grad_x: Callable[[Vector, Vector], Vector]
    grad_sigma: Callable[[Vector, Vector], Vector]
    phi: Callable[[Vector], Vector]
    jac_phi: Callable[[Vector], Vector]


@dataclass(frozen=True)
class DerParameters:
    """Coefficient set of the quadratic dispatch family (scalar decisions).

    The price seen by every unit is ``price_intercept - price_slope * s``
    where s is the average output.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    d: tuple[float, ...]
    price_intercept: float
    price_slope: float

    def __post_init__(self) -> None:
        if not (len(self.a) == len(self.b) == len(self.d)):
            raise ValueError("a, b, d must have equal length")
        if len(self.a) < 1:
            raise ValueError("need at least one unit")

    @property
    def n_units(self) -> int:
        return len(self.a)


@lru_cache(maxsize=None)
def _der_arrays(params: DerParameters) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (np.array(params.a), np.array(params.b), np.array(params.d))


@dataclass(frozen=True)
class AggregativeProblem:
    """N agents, a shared aggregation dimension m, and optional metadata.

    ``rate_metadata`` carries the pair (kappa, lipschitz) derived from the
    extreme Hessian eigenvalues of quadratic instances; it is reporting
    metadata only and never steers the dynamics. ``der_params`` is set by
    the dispatch factories and unlocks vectorized evaluation of the whole
    network in the simulation inner loop.
    """

    agents: tuple[LocalObjective, ...]
    m: int
    rate_metadata: tuple[float, float] | None = None
    der_params: DerParameters | None = None

    def __post_init__(self) -> None:
        if len(self.agents) < 1:
            raise ValueError("need at least one agent")
        if self.m < 1:
            raise ValueError("aggregation dimension must be positive")

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def dim(self) -> int:
        return sum(obj.dim_x for obj in self.agents)

    @property
    def block_offsets(self) -> tuple[int, ...]:
        offs = [0]
        for obj in self.agents:
            offs.append(offs[-1] + obj.dim_x)
        return tuple(offs)

    def blocks(self, x: Vector) -> list[Vector]:
        offs = self.block_offsets
        return [x[offs[i] : offs[i + 1]] for i in range(self.n_agents)]


def _check_dim(problem: AggregativeProblem, x: Vector) -> Vector:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"decision vector has shape {x.shape}, expected ({problem.dim},)")
    return x


def sigma(problem: AggregativeProblem, x: Vector) -> Vector:
    """Network aggregate (1/N) sum_i phi_i(x_i), an m-vector."""
    x = _check_dim(problem, x)
    if problem.der_params is not None:
        return np.array([x.mean()])
    total = np.zeros(problem.m)
    for obj, x_i in zip(problem.agents, problem.blocks(x)):
        total += obj.phi(x_i)
    return total / problem.n_agents


def global_cost(problem: AggregativeProblem, x: Vector) -> float:
    """sum_i f_i(x_i, sigma(x))."""
    x = _check_dim(problem, x)
    s = sigma(problem, x)
    if problem.der_params is not None:
        p = problem.der_params
        a, b, d = _der_arrays(p)
        price = p.price_intercept - p.price_slope * s[0]
        return float(a @ x**2 + b @ x + d.sum() - price * x.sum())
    return float(sum(obj.cost(x_i, s) for obj, x_i in zip(problem.agents, problem.blocks(x))))


def global_gradient(problem: AggregativeProblem, x: Vector) -> Vector:
    """Stacked gradient of the global cost.

    Block i is grad_x f_i(x_i, s) + (1/N) jac_phi_i(x_i)^T sum_j grad_sigma f_j(x_j, s)
    evaluated at s = sigma(x); at the optimum every block vanishes.
    """
    x = _check_dim(problem, x)
    s = sigma(problem, x)
    if problem.der_params is not None:
        p = problem.der_params
        a, b, _ = _der_arrays(p)
        # phi is the identity, so the aggregate-sensitivity term collapses
        # to price_slope * mean(x) = price_slope * s.
        return 2.0 * a * x + b - p.price_intercept + 2.0 * p.price_slope * s[0]
    xs = problem.blocks(x)
    total_gs = np.zeros(problem.m)
    for obj, x_i in zip(problem.agents, xs):
        total_gs += obj.grad_sigma(x_i, s)
    parts = []
    for obj, x_i in zip(problem.agents, xs):
        parts.append(obj.grad_x(x_i, s) + obj.jac_phi(x_i).T @ total_gs / problem.n_agents)
    return np.concatenate(parts)


def quadratic_hessian(params: DerParameters) -> np.ndarray:
    """Exact global-cost Hessian of a dispatch instance."""
    a, _, _ = _der_arrays(params)
    n = params.n_units
    return 2.0 * np.diag(a) + (2.0 * params.price_slope / n) * np.ones((n, n))


def _rate_metadata(params: DerParameters) -> tuple[float, float] | None:
    eigs = np.linalg.eigvalsh(quadratic_hessian(params))
    lo, hi = float(eigs[0]), float(eigs[-1])
    if lo <= 0.0:
        return None
    # kappa is the tightest constant with |grad f|^2 >= (1/kappa)|x - x*|^2;
    # lipschitz is the gradient's Lipschitz constant.
    return (1.0 / lo**2, hi)


def _der_agent(a: float, b: float, d: float, c0: float, c1: float) -> LocalObjective:
    def cost(x: Vector, s: Vector) -> float:
        return float(a * x[0] ** 2 + b * x[0] + d - (c0 - c1 * s[0]) * x[0])

    def grad_x(x: Vector, s: Vector) -> Vector:
        return np.array([2.0 * a * x[0] + b - c0 + c1 * s[0]])

    def grad_sigma(x: Vector, s: Vector) -> Vector:
        return np.array([c1 * x[0]])

    def phi(x: Vector) -> Vector:
        return np.array([x[0]])

    def jac_phi(x: Vector) -> Vector:
        return np.ones((1, 1))

    return LocalObjective(1, cost, grad_x, grad_sigma, phi, jac_phi)


def from_der_parameters(params: DerParameters) -> AggregativeProblem:
    """Build an aggregative problem from explicit dispatch coefficients."""
    c0, c1 = params.price_intercept, params.price_slope
    agents = tuple(
        _der_agent(params.a[i], params.b[i], params.d[i], c0, c1)
        for i in range(params.n_units)
    )
    return AggregativeProblem(
        agents=agents, m=1, rate_metadata=_rate_metadata(params), der_params=params
    )


def make_der_instance() -> AggregativeProblem:
    """Four-unit microgrid preset with its standard coefficient set."""
    params = DerParameters(
        a=(1.0, 0.5, 0.8, 0.7),
        b=(12.0, 10.0, 11.0, 11.0),
        d=(5.0, 8.0, 6.0, 9.0),
        price_intercept=200.0,
        price_slope=0.1 * 4,
    )
    return from_der_parameters(params)


def make_dispatch_instance(n: int, seed: int) -> AggregativeProblem:
    """n generating units with coefficients drawn uniformly from
    a in [0.0024, 0.0779], b in [8, 35], d in [7, 60]; deterministic per seed."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0024, 0.0779, n)
    b = rng.uniform(8.0, 35.0, n)
    d = rng.uniform(7.0, 60.0, n)
    params = DerParameters(
        a=tuple(a.tolist()),
        b=tuple(b.tolist()),
        d=tuple(d.tolist()),
        price_intercept=200.0,
        price_slope=0.1 * n,
    )
    return from_der_parameters(params)


def with_frozen_decisions(problem: AggregativeProblem) -> AggregativeProblem:
    """Variant whose decision dynamics are identically zero.

    Keeps phi and grad_sigma (hence the estimator input signals) but zeroes
    grad_x and jac_phi, so only the estimator evolves. Used for
    estimator-only experiments; the returned objectives deliberately break
    the gradient/cost consistency of real instances.
    """

    def freeze(obj: LocalObjective) -> LocalObjective:
        zero_gx = lambda x, s, _n=obj.dim_x: np.zeros(_n)
        zero_jac = lambda x, _n=obj.dim_x, _m=problem.m: np.zeros((_m, _n))
        return replace(obj, grad_x=zero_gx, jac_phi=zero_jac)

    return AggregativeProblem(
        agents=tuple(freeze(obj) for obj in problem.agents),
        m=problem.m,
        rate_metadata=None,
        der_params=None,
    )
