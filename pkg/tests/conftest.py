# conftest.py
import os
import random
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../src")))

from operformal import fixtures  # noqa: E402
from operformal.algcore import GradedSpace, MultilinearOp, SymmetryType, component_basis  # noqa: E402
from operformal.coder import Coderivation  # noqa: E402


def random_coderivation(space, symmetry, codegree, cutoff, rng, density=0.2, weights=None):
    """Random coderivation of one codegree with entries in [-3, 3]."""
    comps = {}
    for w in weights if weights is not None else range(0, cutoff + 1):
        coeffs = {}
        for key, out in component_basis(space, symmetry, w + 1, degree=codegree).get(codegree, []):
            if rng.random() < density:
                c = rng.randint(-3, 3)
                if c:
                    coeffs.setdefault(key, {})[out] = Fraction(c)
        comps[w] = MultilinearOp(space, w + 1, codegree, symmetry, coeffs)
    return Coderivation(space, symmetry, codegree, cutoff, comps)


SMALL_SPACES = [
    GradedSpace(("x", "y"), (0, 1)),
    GradedSpace(("e", "f"), (1, 2)),
    GradedSpace(("a", "b", "c"), (0, 1, 2)),
    GradedSpace(("p", "q", "r"), (1, 1, 2)),
]


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def massey():
    return fixtures.massey(4)


@pytest.fixture
def strict_fixtures():
    """Strict structures sized so that full pages stay small."""
    return [
        fixtures.strict_square(5),
        fixtures.truncated_polynomial(5),
        fixtures.unital_exterior(5),
        fixtures.exterior(4),
        fixtures.sl2(5),
        fixtures.heisenberg(5),
        fixtures.graded_lie(5),
    ]


@pytest.fixture
def small_spaces():
    return SMALL_SPACES


@pytest.fixture
def fixture_dir(tmp_path):
    fixtures.write_fixtures(tmp_path)
    return tmp_path


@pytest.fixture
def make_coderivation():
    return random_coderivation
