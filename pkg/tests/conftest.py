import numpy as np
import pytest

from aggopt import make_der_instance, ring, solve_kkt_quadratic


def fd_gradient(f, x, h=1e-5):
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        out[k] = (f(x + step) - f(x - step)) / (2 * h)
    return out


def fd_jacobian(f, x, h=1e-5):
    """Central finite differences of a vector function, (out_dim, in_dim)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        cols.append((f(x + step) - f(x - step)) / (2 * h))
    return np.column_stack(cols)


def rel_err(value, reference):
    reference = np.asarray(reference, dtype=float)
    scale = max(1.0, float(np.linalg.norm(reference)))
    return float(np.linalg.norm(np.asarray(value) - reference)) / scale


@pytest.fixture(scope="session")
def der4():
    return make_der_instance()


@pytest.fixture(scope="session")
def ring4():
    return ring(4)


@pytest.fixture(scope="session")
def der4_x_star(der4):
    return solve_kkt_quadratic(der4)
