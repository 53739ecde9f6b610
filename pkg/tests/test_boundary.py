import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htpq.boundary import (
    MeasureTriple,
    Region,
    alpha_bruteforce,
    alpha_closed_form,
    boundary_classify,
    nk_sequence,
    supports_of,
)
from htpq.dyadic import Dyadic
from htpq.numtheory import nth_prime
from htpq.rings import BitstringPrefix, Fe, Ge, InvertedCofinite, InvertedFinite, ProductCoded


def canonical_q(count):
    return [Fraction(1, 2) - Fraction(1, 2 ** (s + 2)) for s in range(count)]


def measure_by_subsets(d, universe):
    """Count subsets of the first ``universe`` primes that contain all factors of some x."""
    primes = [nth_prime(i) for i in range(universe)]
    factor_sets = [{p for p in primes if x % p == 0} for x in d]
    hits = 0
    for r in range(universe + 1):
        for w in itertools.combinations(primes, r):
            w = set(w)
            hits += any(fs <= w for fs in factor_sets)
    return Fraction(hits, 2**universe)


# --- block sequences ----------------------------------------------------------


def test_nk_sequence_examples():
    b = nk_sequence(canonical_q(3), 3)
    assert b.n == (2, 3, 3)
    assert b.x[:2] == (6, 385)
    assert b.universe() == 8


def test_nk_sequence_rejects_bad_input():
    with pytest.raises(ValueError):
        nk_sequence([Fraction(1, 3), Fraction(1, 4)], 2)
    with pytest.raises(ValueError):
        nk_sequence([Fraction(1, 3)], 2)
    with pytest.raises(ValueError):
        nk_sequence([Fraction(0), Fraction(1, 2)], 2)


increasing_q = st.lists(
    st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)), min_size=1, max_size=6, unique=True
).map(sorted)


@settings(max_examples=60)
@given(increasing_q)
def test_each_block_is_the_least_that_keeps_the_product_above_one_minus_q(qs):
    b = nk_sequence(qs, len(qs))
    prev = Fraction(1)
    for n, q, prod in zip(b.n, b.q, b.partial_products()):
        assert prod >= 1 - q
        assert prod == prev * (1 - Fraction(1, 2**n))
        if n > 1:
            assert prev * (1 - Fraction(1, 2 ** (n - 1))) < 1 - q
        prev = prod


def test_blocks_are_products_of_consecutive_primes():
    b = nk_sequence(canonical_q(4), 4)
    pos = 0
    for n, x in zip(b.n, b.x):
        expected = 1
        for i in range(pos, pos + n):
            expected *= nth_prime(i)
        assert x == expected
        pos += n


# --- alpha --------------------------------------------------------------------


def test_alpha_closed_form_examples():
    b = nk_sequence(canonical_q(3), 3)
    assert alpha_closed_form(b, 0) == Dyadic(0)
    assert alpha_closed_form(b, 1) == Dyadic(1, 2)
    assert alpha_closed_form(b, 3).to_fraction() == Fraction(109, 256)
    with pytest.raises(ValueError):
        alpha_closed_form(b, 4)


def test_alpha_bruteforce_examples():
    assert alpha_bruteforce({6}, 2) == Dyadic(1, 2)
    assert alpha_bruteforce({6, 35}, 4).to_fraction() == Fraction(7, 16)
    assert alpha_bruteforce(set(), 3) == Dyadic(0)


def test_alpha_bruteforce_guards():
    with pytest.raises(ValueError):
        alpha_bruteforce({6}, 30, method="enumerate")
    with pytest.raises(ValueError):
        alpha_bruteforce(set(range(1, 60, 2)) - {9, 25, 27, 45, 49}, 20, method="inclusion-exclusion")
    with pytest.raises(ValueError):
        alpha_bruteforce({13}, 3)
    with pytest.raises(ValueError):
        supports_of({12})


@pytest.mark.parametrize("k", range(1, 5))
def test_closed_form_equals_bruteforce_on_blocks(k):
    b = nk_sequence(canonical_q(k), k)
    for method in ("enumerate", "inclusion-exclusion", "shannon"):
        assert alpha_closed_form(b, k) == alpha_bruteforce(b.x, b.universe(), method=method)


squarefree_over_8 = st.sets(st.integers(1, 255), max_size=7).map(
    lambda masks: {
        math.prod(nth_prime(i) for i in range(8) if m >> i & 1) for m in masks
    }
)


@settings(max_examples=60)
@given(squarefree_over_8)
def test_three_methods_agree_with_subset_counting(d):
    expected = measure_by_subsets(d, 8)
    for method in ("enumerate", "inclusion-exclusion", "shannon"):
        assert alpha_bruteforce(d, 8, method=method).to_fraction() == expected


# --- classification -----------------------------------------------------------


def test_classify_examples():
    assert boundary_classify(Fe(0), InvertedFinite({7})) is Region.A
    assert boundary_classify(Fe(0), InvertedFinite({5, 11})) is Region.B
    assert boundary_classify(ProductCoded((6,)), InvertedFinite({2})) is Region.B
    assert boundary_classify(ProductCoded((6,)), InvertedFinite({2, 3})) is Region.A


def test_two_inverted_already_solves_q_three():
    assert boundary_classify(Fe(0), InvertedFinite({2, 5, 11})) is Region.A


def test_classify_never_reports_c_for_these_families():
    rings = [InvertedFinite(()), InvertedFinite({5}), InvertedCofinite({3, 7})]
    for fp in (Fe(0), Fe(2), Ge(1), ProductCoded((6, 385))):
        for ring in rings:
            assert boundary_classify(fp, ring) is not Region.C
    assert boundary_classify(ProductCoded((6,)), InvertedCofinite({2})) is Region.A


def test_classify_needs_a_full_ring():
    with pytest.raises(TypeError):
        boundary_classify(Fe(0), BitstringPrefix("01"))


def test_measure_triple_sums_to_one():
    MeasureTriple(Dyadic(1, 1), Fraction(1, 2), Dyadic(0))
    with pytest.raises(ValueError):
        MeasureTriple(Dyadic(1, 1), Dyadic(1, 1), Dyadic(1, 2))
