import numpy as np
import pytest
from conftest import rel_err

from aggopt import (
    DER4_PUBLISHED_SOLUTION,
    DerParameters,
    DivergenceError,
    centralized_flow,
    fit_decay_rate,
    from_der_parameters,
    global_gradient,
    make_der_instance,
    make_dispatch_instance,
    quadratic_hessian,
    solve_kkt_quadratic,
)
from aggopt.problems import AggregativeProblem, LocalObjective


def single_unit():
    return from_der_parameters(
        DerParameters(a=(1.0,), b=(0.0,), d=(0.0,), price_intercept=200.0, price_slope=0.1)
    )


def bisect_scalar(df, lo, hi, tol=1e-12):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if df(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_kkt_single_unit_closed_form():
    # stationarity: 2P - 200 + 0.2P = 0  =>  P = 200/2.2
    p = single_unit()
    x_star = solve_kkt_quadratic(p)
    assert x_star[0] == pytest.approx(200.0 / 2.2, rel=1e-12)
    root = bisect_scalar(lambda v: global_gradient(p, np.array([v]))[0], 0.0, 200.0)
    assert x_star[0] == pytest.approx(root, abs=1e-9)


def test_kkt_symmetric_two_units():
    p = from_der_parameters(
        DerParameters(a=(0.5, 0.5), b=(7.0, 7.0), d=(1.0, 1.0), price_intercept=200.0, price_slope=0.2)
    )
    x_star = solve_kkt_quadratic(p)
    assert x_star[0] == pytest.approx(x_star[1], abs=1e-10)


def test_kkt_der4_residual_and_published_value(der4, der4_x_star):
    assert np.linalg.norm(global_gradient(der4, der4_x_star)) <= 1e-8
    # the published operating point is not the stationary point of these
    # coefficients; keep the distance on record
    published = np.array(DER4_PUBLISHED_SOLUTION)
    assert np.linalg.norm(der4_x_star - published) > 100.0
    assert np.linalg.norm(global_gradient(der4, published)) > 100.0


def test_kkt_permutation_equivariance():
    p = make_dispatch_instance(5, 4)
    x_star = solve_kkt_quadratic(p)
    perm = [3, 0, 4, 1, 2]
    dp = p.der_params
    shuffled = from_der_parameters(
        DerParameters(
            a=tuple(dp.a[i] for i in perm),
            b=tuple(dp.b[i] for i in perm),
            d=tuple(dp.d[i] for i in perm),
            price_intercept=dp.price_intercept,
            price_slope=dp.price_slope,
        )
    )
    assert np.allclose(solve_kkt_quadratic(shuffled), x_star[perm], atol=1e-10)


def test_kkt_rejects_nonconvex():
    p = from_der_parameters(
        DerParameters(a=(-1.0,), b=(0.0,), d=(0.0,), price_intercept=200.0, price_slope=0.1)
    )
    with pytest.raises(ValueError, match="positive definite"):
        solve_kkt_quadratic(p)


def test_kkt_rejects_nonquadratic():
    # exp(x) - 3x: the gradient-probe linearization lands away from the true
    # stationary point, so the residual check must reject the instance
    obj = LocalObjective(
        dim_x=1,
        cost=lambda x, s: float(np.exp(x[0]) - 3.0 * x[0]),
        grad_x=lambda x, s: np.array([np.exp(x[0]) - 3.0]),
        grad_sigma=lambda x, s: np.zeros(1),
        phi=lambda x: x.copy(),
        jac_phi=lambda x: np.ones((1, 1)),
    )
    nonquadratic = AggregativeProblem(agents=(obj, obj), m=1)
    with pytest.raises(ValueError):
        solve_kkt_quadratic(nonquadratic)


def test_centralized_flow_stationary_at_optimum(der4, der4_x_star):
    traj = centralized_flow(der4, der4_x_star, h=1e-3, t_end=1.0)
    assert np.max(np.abs(traj.x - der4_x_star)) <= 1e-10


def test_centralized_flow_reaches_oracle(der4, der4_x_star):
    traj = centralized_flow(der4, np.array([5.0, 6.0, 3.0, 8.0]), h=1e-3, t_end=60.0)
    assert np.linalg.norm(traj.final - der4_x_star) <= 1e-6


def test_centralized_flow_error_monotone(der4, der4_x_star):
    traj = centralized_flow(der4, np.array([5.0, 6.0, 3.0, 8.0]), h=1e-3, t_end=30.0, stride=10)
    errors = np.linalg.norm(traj.x - der4_x_star, axis=1)
    assert np.all(np.diff(errors) <= 1e-12)


def test_centralized_flow_divergence(der4):
    with pytest.raises(DivergenceError):
        centralized_flow(der4, np.array([5.0, 6.0, 3.0, 8.0]), h=5.0, t_end=500.0)


def test_fit_decay_rate_exact_exponential():
    t = np.linspace(0.0, 3.0, 100)
    assert fit_decay_rate(t, np.exp(-2.0 * t)) == pytest.approx(2.0, abs=1e-6)


def test_fit_decay_rate_constant_series():
    t = np.linspace(0.0, 1.0, 50)
    assert fit_decay_rate(t, np.ones(50)) == pytest.approx(0.0, abs=1e-12)


def test_fit_decay_rate_trims_and_errors():
    t = np.linspace(0.0, 1.0, 30)
    e = np.exp(-t)
    e[::2] = -1.0  # non-positive entries are dropped
    assert fit_decay_rate(t, e) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        fit_decay_rate(t[:8], np.exp(-t[:8]))
    with pytest.raises(ValueError):
        fit_decay_rate(t, np.full(30, 1e-12))


def _fitted_rate_and_bound(problem, x0):
    x_star = solve_kkt_quadratic(problem)
    traj = centralized_flow(problem, x0, h=1e-3, t_end=60.0, stride=10)
    errors = np.linalg.norm(traj.x - x_star, axis=1)
    kappa, lipschitz = problem.rate_metadata
    return fit_decay_rate(traj.times, errors), kappa / (1.0 + 2.0 * lipschitz)


def test_decay_rate_exceeds_reported_bound_der4(der4):
    rate, bound = _fitted_rate_and_bound(der4, np.array([5.0, 6.0, 3.0, 8.0]))
    assert bound > 0
    assert rate >= bound


@pytest.mark.parametrize("seed", range(5))
def test_decay_rate_exceeds_reported_bound_well_conditioned(seed):
    # draws with a >= 0.5 keep the smallest Hessian eigenvalue >= 1, where
    # the reported constant is a meaningful lower bound
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    params = DerParameters(
        a=tuple(rng.uniform(0.5, 1.5, n).tolist()),
        b=tuple(rng.uniform(0.0, 50.0, n).tolist()),
        d=tuple(rng.uniform(0.0, 10.0, n).tolist()),
        price_intercept=200.0,
        price_slope=0.1 * n,
    )
    problem = from_der_parameters(params)
    rate, bound = _fitted_rate_and_bound(problem, rng.uniform(0.0, 10.0, n))
    assert rate >= bound


@pytest.mark.parametrize("seed", range(4))
def test_flow_endpoint_matches_kkt_dispatch(seed):
    n = 2 + seed
    problem = make_dispatch_instance(n, seed)
    x_star = solve_kkt_quadratic(problem)
    eigs = np.linalg.eigvalsh(quadratic_hessian(problem.der_params))
    h = 0.5 / eigs[-1]
    t_end = float(np.log(np.linalg.norm(x_star) * 1e9) / eigs[0])
    traj = centralized_flow(problem, np.zeros(n), h=h, t_end=t_end, stride=1000)
    assert rel_err(traj.final, x_star) <= 1e-5
