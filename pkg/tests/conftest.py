import numpy as np
import pytest

from mirrorkit import LogCosh, NegEntropy, Quadratic, Quartic, SeparableQ, SquaredL2


def all_potentials(dim):
    return [SquaredL2(dim), NegEntropy(dim), SeparableQ(3.0, dim), SeparableQ(1.5, dim)]


def all_losses():
    return [Quadratic(), Quartic(), LogCosh()]


def random_in_domain(p, rng, low=0.1, high=2.0):
    """A random point strictly inside the potential's domain."""
    w = rng.uniform(low, high, size=p.dim)
    if p.domain == "all_reals":
        w *= rng.choice([-1.0, 1.0], size=p.dim)
    return w


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
