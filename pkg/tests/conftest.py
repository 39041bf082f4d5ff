import numpy as np
import pytest

from sensoropt import (
    TimeGrid,
    build_uniform_shear_model,
    compute_elementary_set,
    default_prior,
    sample_prior,
)


@pytest.fixture(scope="session")
def four_dof_fimset():
    """Small but realistic elementary set shared across test modules."""
    model = build_uniform_shear_model(4)
    samples = sample_prior(default_prior(), 200, seed=7)
    return compute_elementary_set(model, samples, TimeGrid(400, 0.01))


def random_feasible_z(rng, n_dof, budget, mix=0.9):
    """Strictly interior point with the exact budget: a random vertex
    blended with the uniform center."""
    support = rng.choice(n_dof, size=budget, replace=False)
    vertex = np.zeros(n_dof)
    vertex[support] = 1.0
    return (1.0 - mix) * np.full(n_dof, budget / n_dof) + mix * vertex
