"""Shared fixtures: the benchmark model, its solution, and a random-instance factory."""

import numpy as np
import pytest

from regimeplan import Generator, ModelParams, benchmark_params, solve


@pytest.fixture(scope="session")
def p_bench():
    return benchmark_params()


@pytest.fixture(scope="session")
def sol_bench(p_bench):
    return solve(p_bench)


def random_params(rng, m=None):
    """A random parameter set satisfying the solver hypotheses.

    Off-diagonal rates, N, and R are strictly positive and r > 0; sigma may
    be zero and theta, c, h take either sign, which the quadratic and slope
    systems must tolerate.
    """
    if m is None:
        m = int(rng.integers(1, 4))
    q = rng.uniform(0.1, 3.0, size=(m, m))
    return ModelParams(
        gen=Generator(q),
        r=float(rng.uniform(0.02, 0.15)),
        theta=rng.uniform(-3.0, 5.0, size=m),
        sigma=rng.uniform(0.0, 1.5, size=m),
        c=rng.uniform(-2.0, 4.0, size=m),
        h=rng.uniform(-1.0, 6.0, size=m),
        N=rng.uniform(0.05, 2.0, size=m),
        R=rng.uniform(0.05, 2.0, size=m),
    )


@pytest.fixture(scope="session")
def make_params():
    return random_params
