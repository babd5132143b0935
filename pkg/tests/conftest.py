import numpy as np
import pytest

from divbar import (
    ExponentialFamily,
    ModelParams,
    TabulatedDensity,
    ValueFunction,
    solve_policy,
)

# Canonical regression fixture: mu=2, sigma2=5, c=0.05, beta=0.8, k=0.5,
# exponential jump density with unit rate.
CANONICAL = dict(mu=2.0, sigma2=5.0, c=0.05, k=0.5, beta=0.8)


@pytest.fixture(scope="session")
def exp_unit():
    return ExponentialFamily(rate=1.0)


@pytest.fixture(scope="session")
def canonical_model(exp_unit):
    return ModelParams(levy=exp_unit, **CANONICAL)


@pytest.fixture(scope="session")
def canonical_policy(canonical_model):
    return solve_policy(canonical_model)


@pytest.fixture(scope="session")
def canonical_vf(canonical_model, canonical_policy):
    return ValueFunction(canonical_model, canonical_policy)


@pytest.fixture(scope="session")
def fast_model(exp_unit):
    # same fixture but heavily discounted so a 40-unit horizon truncates
    return ModelParams(levy=exp_unit, **{**CANONICAL, "c": 0.5})


@pytest.fixture(scope="session")
def fast_policy(fast_model):
    return solve_policy(fast_model)


@pytest.fixture(scope="session")
def fast_vf(fast_model, fast_policy):
    return ValueFunction(fast_model, fast_policy)


@pytest.fixture(scope="session")
def tabulated_unit():
    # fine piecewise-linear approximation of exp(-z) on [0, 40]
    z = np.linspace(0.0, 40.0, 200_001)
    return TabulatedDensity(z=z, density=np.exp(-z), tail_rate=1.0)
