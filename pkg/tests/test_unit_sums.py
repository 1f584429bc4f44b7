import pytest

from errors import InvalidInputError, SearchExhaustedError
from quadratic import QuadraticOrder, fundamental_unit, torsion_units
from unit_sums import (
    SearchOutcome,
    UnitSumRepr,
    find_distinct_units,
    find_k_units,
    pad_representation,
    unit_pool,
    unit_sum_lengths,
)


def _resums(rep):
    total = rep.target.order.zero
    for term in rep.terms:
        assert term.is_unit()
        total = total + term
    return total == rep.target


def test_find_two_units_for_two(z2):
    outcome = find_k_units(z2.integer(2), 2, exp_bound=5)
    assert outcome.found and not outcome.exhaustive
    rep = outcome.representation
    assert rep.k == 2 and _resums(rep)
    assert rep.terms == (z2.one, z2.one)


def test_zero_is_a_cancelling_pair(z2):
    rep = find_k_units(z2.zero, 2, exp_bound=5).representation
    assert rep.terms == (z2.one, -z2.one)


def test_a_unit_is_its_own_one_term_sum(z2):
    eta = z2.elt(2, 2)
    rep = find_k_units(eta, 1).representation
    assert rep.terms == (eta,)
    assert not find_k_units(z2.elt(0, 2), 1, exp_bound=3).found


def test_imaginary_absence_is_certified():
    order = QuadraticOrder(-5)
    outcome = find_k_units(order.elt(0, 2), 3)
    assert not outcome.found
    assert outcome.exhaustive and outcome.exp_bound is None
    assert outcome.to_json()["certificate"] == "no representation exists"


def test_real_absence_names_the_bound(z2):
    outcome = find_k_units(z2.elt(0, 2), 1, exp_bound=3)
    assert outcome.to_json() == {"found": False, "exp_bound": 3, "exhaustive": False,
                                 "certificate": "none with exponents |a| <= 3"}


def test_k_must_be_positive(z2):
    with pytest.raises(InvalidInputError):
        find_k_units(z2.one, 0)


@pytest.mark.parametrize("k", [3, 4, 5])
def test_witness_does_not_depend_on_the_bound(z2, rng, k):
    pool = unit_pool(z2, 3)
    for _ in range(20):
        terms = [rng.choice(pool) for _ in range(k)]
        alpha = sum(terms[1:], terms[0])
        small = find_k_units(alpha, k, exp_bound=3)
        large = find_k_units(alpha, k, exp_bound=5)
        assert small.found and large.found
        assert small.representation.terms == large.representation.terms


def test_witness_for_a_four_term_sum(z2):
    alpha = z2.from_basis(14, 8)
    witness = find_k_units(alpha, 4, exp_bound=3).representation.terms
    assert find_k_units(alpha, 4, exp_bound=5).representation.terms == witness
    assert find_k_units(alpha, 4, exp_bound=8).representation.terms == witness


def test_unit_pool_order(z2):
    pool = unit_pool(z2, 1)
    eta = fundamental_unit(z2).unit
    assert pool == [z2.one, -z2.one, eta.inverse(), -eta.inverse(), eta, -eta]
    assert unit_pool(QuadraticOrder(-1), 7) == torsion_units(QuadraticOrder(-1))


def _random_successes(order, rng, count, exp_bound=4):
    pool = unit_pool(order, exp_bound)
    out = []
    while len(out) < count:
        k = rng.randint(1, 3)
        terms = [rng.choice(pool) for _ in range(k)]
        alpha = sum(terms[1:], terms[0])
        outcome = find_k_units(alpha, k, exp_bound)
        assert outcome.found
        out.append(outcome.representation)
    return out


@pytest.mark.parametrize("d", [5, -3])
def test_padding_by_one_and_two(d, rng):
    order = QuadraticOrder(d)
    for rep in _random_successes(order, rng, 50):
        for l in (rep.k + 1, rep.k + 2):
            padded = pad_representation(rep, l, exp_bound=4)
            assert padded.k == l
            assert padded.target == rep.target
            assert _resums(padded)


def test_padding_by_two_without_a_unit_splitting_of_one(z2, rng):
    for rep in _random_successes(z2, rng, 50):
        padded = pad_representation(rep, rep.k + 2, exp_bound=4)
        assert padded.k == rep.k + 2 and _resums(padded)


def test_padding_examples(z2):
    rep = find_k_units(z2.integer(2), 2, exp_bound=5).representation
    # units of Z[sqrt(2)] are 1 mod sqrt(2), so three of them never sum to 2
    with pytest.raises(SearchExhaustedError):
        pad_representation(rep, 3, exp_bound=5)
    padded = pad_representation(rep, 4, exp_bound=5)
    assert padded.k == 4 and padded.target == z2.integer(2)
    assert _resums(padded)
    assert not padded.distinct

    single = UnitSumRepr((z2.one,), z2.one)
    assert pad_representation(single, 3, exp_bound=5).k == 3


def test_padding_needs_more_terms(z2):
    rep = UnitSumRepr((z2.one, z2.one), z2.integer(2))
    for l in (1, 2):
        with pytest.raises(InvalidInputError):
            pad_representation(rep, l)


def test_distinct_units_for_three(z2):
    outcome = find_distinct_units(z2.integer(3))
    assert outcome.found
    rep = outcome.representation
    assert rep.distinct
    assert len(set(rep.terms)) == rep.k
    assert _resums(rep)


def test_distinct_units_for_zero(z2):
    rep = find_distinct_units(z2.zero).representation
    assert rep.terms == (z2.one, -z2.one)
    assert not find_distinct_units(z2.zero, max_terms=1).found


def test_distinct_units_golden_ratio_field(z5):
    rep = find_distinct_units(z5.integer(2)).representation
    assert rep.distinct and _resums(rep)


def test_distinct_units_imaginary_field():
    order = QuadraticOrder(-1)
    i = order.elt(0, 2)
    rep = find_distinct_units(order.one + i).representation
    assert set(rep.terms) == {order.one, i}
    outcome = find_distinct_units(order.integer(3))
    assert not outcome.found and outcome.exhaustive


def test_distinct_units_needs_positive_max_terms(z2):
    with pytest.raises(InvalidInputError):
        find_distinct_units(z2.one, max_terms=0)


@pytest.mark.parametrize("d", [2, 5])
def test_every_small_element_is_a_sum_of_distinct_units(d):
    order = QuadraticOrder(d)
    for alpha in order.box(4):
        outcome = find_distinct_units(alpha, exp_bound=12, max_terms=24)
        assert outcome.found, str(alpha)
        assert len(set(outcome.representation.terms)) == outcome.representation.k


@pytest.mark.slow
@pytest.mark.parametrize("d", [2, 5])
def test_every_element_up_to_height_twenty_is_a_sum_of_distinct_units(d):
    order = QuadraticOrder(d)
    for alpha in order.box(20):
        assert find_distinct_units(alpha, exp_bound=12, max_terms=24).found, str(alpha)


def test_repr_validation(z2):
    with pytest.raises(InvalidInputError):
        UnitSumRepr((), z2.zero)
    with pytest.raises(InvalidInputError):
        UnitSumRepr((z2.integer(2),), z2.integer(2))
    with pytest.raises(InvalidInputError):
        UnitSumRepr((z2.one, z2.one), z2.integer(3))
    with pytest.raises(InvalidInputError):
        UnitSumRepr((z2.one, z2.one), z2.integer(2), distinct=True)


def test_outcome_json(z2):
    rep = UnitSumRepr((z2.one, z2.one), z2.integer(2))
    payload = SearchOutcome(rep, 5, False).to_json()
    assert payload["found"] and payload["k"] == 2
    assert payload["terms"] == ["1", "1"]
    assert payload["target"] == "2"


def test_lengths_in_an_infinite_class_field():
    order = QuadraticOrder(-5)
    lengths = unit_sum_lengths(order, 2, max_terms=6)
    assert lengths[order.integer(2)] == 2
    assert lengths[order.zero] == 2
    assert lengths[order.one] == 1
    assert lengths[order.elt(0, 2)] is None


def test_lengths_validate_arguments(z2):
    with pytest.raises(InvalidInputError):
        unit_sum_lengths(z2, -1)
    with pytest.raises(InvalidInputError):
        unit_sum_lengths(z2, 2, max_terms=0)
