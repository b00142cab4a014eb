import numpy as np
import pytest
from conftest import fd_gradient, fd_jacobian, rel_err

from aggopt import (
    AggregativeProblem,
    DerParameters,
    from_der_parameters,
    global_cost,
    global_gradient,
    make_der_instance,
    make_dispatch_instance,
    quadratic_hessian,
    sigma,
    with_frozen_decisions,
)


def single_unit(a=1.0, b=0.0, d=0.0):
    return from_der_parameters(
        DerParameters(a=(a,), b=(b,), d=(d,), price_intercept=200.0, price_slope=0.1)
    )


def strip_fast_path(problem):
    return AggregativeProblem(agents=problem.agents, m=problem.m)


def test_sigma_der4_initial_point(der4):
    assert sigma(der4, np.array([5.0, 6.0, 3.0, 8.0]))[0] == pytest.approx(5.5)


def test_sigma_identity_single_agent():
    p = single_unit()
    assert sigma(p, np.array([3.7]))[0] == pytest.approx(3.7)


def test_sigma_zero(der4):
    assert sigma(der4, np.zeros(4))[0] == 0.0


def test_sigma_dimension_mismatch(der4):
    with pytest.raises(ValueError):
        sigma(der4, np.zeros(3))


def test_global_cost_at_zero_is_fixed_costs(der4):
    assert global_cost(der4, np.zeros(4)) == pytest.approx(28.0)


def test_global_cost_single_unit_hand_value():
    # independent scalar evaluation: x=1, price 200 - 0.1*1,
    # f = 1*1 + 0 + 0 - (200 - 0.1)*1
    p = single_unit()
    expected = 1.0 + 0.0 + 0.0 - (200.0 - 0.1 * 1.0) * 1.0
    assert expected == pytest.approx(-198.9)
    assert global_cost(p, np.array([1.0])) == pytest.approx(expected, abs=1e-12)


def test_global_cost_minimal_at_oracle(der4, der4_x_star):
    best = global_cost(der4, der4_x_star)
    rng = np.random.default_rng(0)
    for _ in range(100):
        perturbed = der4_x_star + rng.normal(scale=5.0, size=4)
        assert global_cost(der4, perturbed) >= best


def test_global_gradient_zero_at_oracle(der4, der4_x_star):
    assert np.linalg.norm(global_gradient(der4, der4_x_star)) <= 1e-8


@pytest.mark.parametrize(
    "problem", [make_der_instance(), make_dispatch_instance(5, 3)], ids=["der4", "dispatch5"]
)
def test_global_gradient_matches_finite_differences(problem):
    rng = np.random.default_rng(42)
    for _ in range(20):
        x = rng.uniform(-50, 50, problem.dim)
        fd = fd_gradient(lambda v: global_cost(problem, v), x)
        assert rel_err(global_gradient(problem, x), fd) <= 1e-6


def test_global_gradient_regression_at_initial_point(der4):
    x0 = np.array([5.0, 6.0, 3.0, 8.0])
    expected = np.array([-173.6, -179.6, -179.8, -173.4])
    assert np.allclose(global_gradient(der4, x0), expected, atol=1e-9)
    fd = fd_gradient(lambda v: global_cost(der4, v), x0)
    assert rel_err(expected, fd) <= 1e-6


def test_der4_parameters(der4):
    p = der4.der_params
    assert p.a == (1.0, 0.5, 0.8, 0.7)
    assert p.b == (12.0, 10.0, 11.0, 11.0)
    assert p.d == (5.0, 8.0, 6.0, 9.0)
    assert p.price_intercept == 200.0
    assert p.price_slope == pytest.approx(0.4)
    assert der4.n_agents == 4 and der4.m == 1 and der4.dim == 4


def test_der4_agent_derivative_examples(der4):
    agent1 = der4.agents[0]
    assert agent1.grad_sigma(np.array([10.0]), np.array([123.0]))[0] == pytest.approx(4.0)
    assert agent1.grad_x(np.array([0.0]), np.array([0.0]))[0] == pytest.approx(-188.0)
    agent2 = der4.agents[1]
    assert agent2.cost(np.array([0.0]), np.array([999.0])) == pytest.approx(8.0)


def test_dispatch_factory_ranges_and_determinism():
    p = make_dispatch_instance(15, 1)
    q = make_dispatch_instance(15, 1)
    assert p.der_params == q.der_params
    a, b, d = np.array(p.der_params.a), np.array(p.der_params.b), np.array(p.der_params.d)
    assert np.all((a >= 0.0024) & (a <= 0.0779))
    assert np.all((b >= 8.0) & (b <= 35.0))
    assert np.all((d >= 7.0) & (d <= 60.0))
    assert p.der_params.price_slope == pytest.approx(1.5)


def test_dispatch_single_agent_gradient():
    p = make_dispatch_instance(1, 0)
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = rng.uniform(-100, 100, 1)
        fd = fd_gradient(lambda v: global_cost(p, v), x)
        assert rel_err(global_gradient(p, x), fd) <= 1e-6


@pytest.mark.parametrize("seed", range(20))
def test_quadratic_hessian_positive_definite(seed):
    p = make_dispatch_instance(2 + seed % 7, seed)
    hess = quadratic_hessian(p.der_params)
    a = np.array(p.der_params.a)
    n = len(a)
    assert np.allclose(hess, 2.0 * np.diag(a) + 0.2 * np.ones((n, n)), atol=1e-12)
    assert np.linalg.eigvalsh(hess)[0] > 0


def test_rate_metadata_from_hessian_eigenvalues(der4):
    eigs = np.linalg.eigvalsh(quadratic_hessian(der4.der_params))
    kappa, lipschitz = der4.rate_metadata
    assert kappa == pytest.approx(1.0 / eigs[0] ** 2, rel=1e-12)
    assert lipschitz == pytest.approx(eigs[-1], rel=1e-12)


@pytest.mark.parametrize(
    "problem", [make_der_instance(), make_dispatch_instance(6, 2)], ids=["der4", "dispatch6"]
)
def test_vectorized_path_matches_per_agent_path(problem):
    generic = strip_fast_path(problem)
    rng = np.random.default_rng(11)
    for _ in range(10):
        x = rng.uniform(-30, 30, problem.dim)
        assert np.allclose(sigma(problem, x), sigma(generic, x), atol=1e-12)
        assert global_cost(problem, x) == pytest.approx(global_cost(generic, x), abs=1e-9)
        assert np.allclose(global_gradient(problem, x), global_gradient(generic, x), atol=1e-10)


def test_local_objective_derivatives_match_finite_differences(der4):
    rng = np.random.default_rng(5)
    for obj in der4.agents:
        for _ in range(5):
            x_i = rng.uniform(-20, 20, 1)
            s = rng.uniform(-20, 20, 1)
            assert rel_err(obj.grad_x(x_i, s), fd_gradient(lambda v: obj.cost(v, s), x_i)) <= 1e-6
            assert rel_err(obj.grad_sigma(x_i, s), fd_gradient(lambda v: obj.cost(x_i, v), s)) <= 1e-6
            assert rel_err(obj.jac_phi(x_i), fd_jacobian(obj.phi, x_i)) <= 1e-6


def test_with_frozen_decisions(der4):
    frozen = with_frozen_decisions(der4)
    x_i = np.array([4.0])
    s = np.array([2.0])
    assert np.array_equal(frozen.agents[0].grad_x(x_i, s), np.zeros(1))
    assert np.array_equal(frozen.agents[0].jac_phi(x_i), np.zeros((1, 1)))
    assert frozen.agents[0].phi(x_i)[0] == der4.agents[0].phi(x_i)[0]
    assert frozen.agents[0].grad_sigma(x_i, s)[0] == der4.agents[0].grad_sigma(x_i, s)[0]
    assert frozen.der_params is None and frozen.rate_metadata is None


def test_problem_validation():
    with pytest.raises(ValueError):
        DerParameters(a=(1.0,), b=(1.0, 2.0), d=(0.0,), price_intercept=200.0, price_slope=0.1)
    with pytest.raises(ValueError):
        make_dispatch_instance(0, 1)
