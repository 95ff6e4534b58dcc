"""Shared random generators for the property suites.

Everything is seeded; the suites are deterministic across runs.
"""

import itertools
import random

import pytest

from skewforms.expr import Expression, VariableSet, ZERO, const, var
from skewforms.forms import DifferentialForm


def random_polynomial(rng: random.Random, names, max_degree: int = 3,
                      max_terms: int = 3) -> Expression:
    """Random polynomial with small nonzero integer coefficients and total
    degree at most max_degree."""
    total = ZERO
    for _ in range(rng.randint(1, max_terms)):
        term = const(rng.choice([-4, -3, -2, -1, 1, 2, 3, 4]))
        for _ in range(rng.randint(0, max_degree)):
            term = term * var(rng.choice(names))
        total = total + term
    return total


def random_form(rng: random.Random, variables: VariableSet, degree: int,
                max_degree: int = 3, density: float = 0.8) -> DifferentialForm:
    keys = list(itertools.combinations(range(1, variables.dimension + 1), degree))
    coeffs = {}
    for key in keys:
        if rng.random() < density:
            coeffs[key] = random_polynomial(rng, variables.names, max_degree)
    if not coeffs and keys:
        coeffs[keys[0]] = random_polynomial(rng, variables.names, max_degree)
    return DifferentialForm(variables, degree, coeffs)


def random_point(rng: random.Random, names, lo: float = -2.0, hi: float = 2.0):
    return {name: rng.uniform(lo, hi) for name in names}


@pytest.fixture
def rng():
    return random.Random(20260808)


VARSETS = {
    2: VariableSet(["x", "y"]),
    3: VariableSet(["x", "y", "z"]),
    4: VariableSet(["x", "y", "z", "w"]),
}
