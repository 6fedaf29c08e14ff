import numpy as np
import pytest

from hilproc import CoeffSeq, InnovationModel


def random_coeffs(gen, dim, j_max):
    """Random finitely supported coefficient sequence for identity tests."""
    offsets = gen.choice(
        np.arange(-j_max, j_max + 1), size=int(gen.integers(1, 2 * j_max + 2)), replace=False
    )
    return CoeffSeq(
        {int(j): gen.normal(size=(dim, dim)) * gen.uniform(0.1, 1.0) for j in offsets},
        dim=dim,
    )


def random_model(gen, dim, kind):
    if kind == "bounded":
        return InnovationModel.bounded(dim, float(gen.uniform(0.1, 2.0)))
    if kind == "subexp":
        return InnovationModel.sub_exponential(dim, float(gen.uniform(0.2, 1.5)))
    return InnovationModel.heavy_tail(
        dim, alpha=float(gen.uniform(3.5, 8.0)), scale=float(gen.uniform(0.3, 1.2))
    )


@pytest.fixture
def gen():
    return np.random.default_rng(20260810)
