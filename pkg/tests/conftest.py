import numpy as np
import pytest

from neklab.polyalg import Polynomial


def random_polynomial(rng, n, N, max_degree=4, max_terms=20, scale=1.0):
    """Random sparse polynomial with integer-ish exponents and O(scale) coeffs."""
    nvars = 2 * n + 2 * N
    terms = {}
    for _ in range(rng.integers(1, max_terms + 1)):
        budget = int(rng.integers(0, max_degree + 1))
        exps = [0] * nvars
        while budget > 0:
            exps[int(rng.integers(0, nvars))] += 1
            budget -= 1
        terms[tuple(exps)] = float(rng.normal()) * scale
    return Polynomial(n, N, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
