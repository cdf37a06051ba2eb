# tests/test_spectral.py
import random

import pytest

from operformal import fixtures
from operformal.errors import ContractViolation
from operformal.exactla import RatMatrix, rank
from operformal.kaledin import FormalityWitness, formalize, truncated_class
from operformal.spectral import (
    CoderComplex,
    FilteredComplex,
    build_pages,
    degenerates_at_E2,
    euler_class,
    push_euler,
)


@pytest.fixture
def two_step_complex():
    """C^0 = <a (weight 0), b (weight 1)>, C^1 = <c (0), u (2), v (2)>, da = u, db = v."""
    d0 = RatMatrix(3, 2, {(1, 0): 1, (2, 1): 1})
    return FilteredComplex({0: [0, 1], 1: [0, 2, 2]}, {0: d0}, 2)


def test_generic_pages(two_step_complex):
    cx = two_step_complex
    assert cx.page(1).dimensions() == {(0, 0): 1, (0, 1): 1, (1, -1): 1, (2, -1): 2}
    assert cx.page(2).dimensions() == {(0, 0): 1, (0, 1): 1, (2, -1): 1}
    assert cx.page(3).dimensions() == {(0, 1): 1}


def test_generic_differentials(two_step_complex):
    cx = two_step_complex
    first = cx.page(1)
    assert set(first.nonzero_differentials()) == {(1, -1)}
    assert first.target(1, -1) == (2, -1)
    assert not cx.page(2).is_degenerate()
    assert cx.page(3).is_degenerate()


def test_generic_class_handles(two_step_complex):
    cx = two_step_complex
    handle = cx.class_of({0: 1}, 1, 0, 0)
    assert cx.differential(handle).is_zero()
    lifted = cx.advance(handle)
    assert lifted is not None and lifted.page == 2
    image = cx.differential(lifted)
    assert (image.p, image.q) == (2, -1)
    assert not image.is_zero()
    assert cx.advance(lifted) is None


def test_class_of_rejects_non_cycles(two_step_complex):
    with pytest.raises(ContractViolation):
        two_step_complex.class_of({0: 1}, 3, 0, 0)


def test_filtered_complex_validation():
    with pytest.raises(ContractViolation):
        FilteredComplex({0: [1, 0]}, {}, 1)
    with pytest.raises(ContractViolation):
        FilteredComplex({0: [0], 1: [0]}, {0: RatMatrix.zeros(2, 1)}, 1)


def test_massey_euler_class_dies_on_page_two(massey):
    push = push_euler(massey)
    assert push.survives_to == 1
    assert push.failing_page == 2
    image = push.first_nonzero
    assert (image.p, image.q) == (2, -1)
    assert image.representative is not None
    assert not degenerates_at_E2(massey)


def test_euler_class_representative(massey):
    handle = euler_class(massey)
    assert (handle.page, handle.p, handle.q) == (2, 0, 0)
    assert handle.representative.codegree == 0
    assert handle.representative.min_weight == 0


def test_strict_structures_survive_and_degenerate(strict_fixtures):
    for q in strict_fixtures:
        assert push_euler(q).survives_to == q.cutoff
        assert degenerates_at_E2(q)


@pytest.mark.parametrize(
    "builder, cutoff, k",
    [
        (fixtures.massey, 4, 2),
        (fixtures.massey_weight3, 5, 3),
        (fixtures.lie_massey, 4, 2),
        (fixtures.lie_massey_weight3, 5, 3),
    ],
)
def test_concentrated_structures_degenerate_past_their_weight(builder, cutoff, k):
    q = builder(cutoff)
    pages = build_pages(q, cutoff)
    for page in pages:
        if page.r > k:
            assert page.is_degenerate(), f"E_{page.r}"
    assert not pages[k - 1].is_degenerate()


def _gauged_strict_square():
    return fixtures.gauged(fixtures.strict_square(4), random.Random(12), density=0.6)


@pytest.mark.parametrize(
    "make",
    [
        lambda: fixtures.massey(4),
        lambda: fixtures.mixed_ass(4),
        lambda: fixtures.strict_square(4),
        lambda: fixtures.lie_massey(4),
        lambda: fixtures.mixed_lie(4),
        lambda: fixtures.massey_weight3(5),
        _gauged_strict_square,
    ],
)
def test_page_differentials_square_to_zero_and_compute_the_next_page(make):
    q = make()
    pages = build_pages(q, q.cutoff)
    for page, following in zip(pages, pages[1:]):
        for cell, d in page.differentials.items():
            onward = page.differentials.get(page.target(*cell))
            if onward is not None:
                assert (onward @ d).is_zero(), f"d_{page.r} d_{page.r} at {cell}"
        incoming = {page.target(*cell): rank(d) for cell, d in page.differentials.items()}
        for (p, q_), dim in page.dimensions().items():
            outgoing = page.differentials.get((p, q_))
            kernel_dim = dim - (rank(outgoing) if outgoing is not None else 0)
            assert following.dimension(p, q_) == kernel_dim - incoming.get((p, q_), 0), f"E_{following.r} at {(p, q_)}"
        assert set(following.dimensions()) <= set(page.dimensions())


def _criteria_agree(q, pages=True):
    level = truncated_class(q, q.cutoff).vanishing_level
    survives = push_euler(q).survives_to
    assert level == survives
    formal = isinstance(formalize(q), FormalityWitness)
    assert formal == (survives == q.cutoff)
    if pages:
        assert formal == degenerates_at_E2(q)


@pytest.mark.parametrize(
    "builder",
    [
        fixtures.massey,
        fixtures.mixed_ass,
        fixtures.strict_square,
        fixtures.heisenberg,
        fixtures.lie_massey,
        fixtures.mixed_lie,
        fixtures.lie_semidirect,
    ],
)
def test_criteria_agree_on_named_structures(builder):
    _criteria_agree(builder(4))


@pytest.mark.slow
def test_criteria_agree_on_gauged_structures():
    for q in fixtures.gauged_corpus("ass", 100, seed=1001) + fixtures.gauged_corpus("lie", 100, seed=2002):
        _criteria_agree(q, pages=False)


@pytest.mark.parametrize(
    "builder, cutoff",
    [(fixtures.massey, 4), (fixtures.mixed_ass, 4), (fixtures.lie_massey, 4), (fixtures.massey_weight3, 5)],
)
def test_verdicts_are_gauge_invariant(builder, cutoff):
    q = builder(cutoff)
    level = truncated_class(q, q.cutoff).vanishing_level
    survives = push_euler(q).survives_to
    rng = random.Random(31)
    for _ in range(3):
        r = fixtures.gauged(q, rng, density=0.6)
        assert truncated_class(r, r.cutoff).vanishing_level == level
        assert push_euler(r).survives_to == survives


def test_criteria_agree_on_mixed_corpus():
    for q in fixtures.mixed_corpus(50, seed=9):
        _criteria_agree(q)


def test_build_pages_range(massey):
    with pytest.raises(ContractViolation):
        build_pages(massey, 0)
    with pytest.raises(ContractViolation):
        build_pages(massey, 5)


def test_restricted_complex_refuses_missing_degrees(massey):
    cx = CoderComplex(massey, degrees=(0, 1)).filtered()
    with pytest.raises(ContractViolation):
        cx.d(1)
