import random

import pytest

from errors import HypothesisFailure, InvalidInputError, NotInvertibleError
from matrix_units import (
    Elem,
    EnWord,
    NegId,
    Perm,
    RingMatrix,
    diagonal_split,
    diagonalize,
    distinct_split,
    en_eval,
    equivalence_transfer,
    matrix_inverse,
    random_matrix,
    random_suite,
    search_two_unit_decompositions,
    two_units_decompose,
    vamos_witness,
)
from quadratic import QuadraticOrder
from ring_core import HurwitzQuat, HurwitzRing, IntegerRing, PolynomialRing

Z = IntegerRing()


def zmat(rows):
    return RingMatrix(Z, rows)


def det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def test_en_eval_examples():
    assert en_eval(EnWord((Elem(5, 1, 2),)), 2, Z) == zmat([[1, 5], [0, 1]])
    assert en_eval(EnWord(), 3, Z).is_identity()
    rotation = EnWord((Elem(1, 1, 2), Elem(-1, 2, 1), Elem(1, 1, 2)))
    assert en_eval(rotation, 2, Z) == zmat([[0, 1], [-1, 0]])
    assert en_eval(EnWord((NegId(),)), 2, Z) == zmat([[-1, 0], [0, -1]])
    assert en_eval(EnWord((Perm((2, 3, 1)),)), 3, Z) == zmat([[0, 0, 1], [1, 0, 0], [0, 1, 0]])


def test_malformed_generators():
    with pytest.raises(InvalidInputError):
        Elem(1, 2, 2)
    with pytest.raises(InvalidInputError):
        Perm((1, 1))
    with pytest.raises(InvalidInputError):
        en_eval(EnWord((Elem(1, 1, 3),)), 2, Z)
    with pytest.raises(InvalidInputError):
        en_eval(EnWord((Perm((1, 2, 3)),)), 2, Z)
    with pytest.raises(InvalidInputError):
        EnWord.from_json([{"rotate": 1}], Z)


def _random_word(ring, rng, n, length):
    gens = []
    for _ in range(length):
        pick = rng.randrange(3)
        if pick == 0:
            i, j = rng.sample(range(1, n + 1), 2)
            gens.append(Elem(ring.random_element(rng, 5), i, j))
        elif pick == 1:
            images = list(range(1, n + 1))
            rng.shuffle(images)
            gens.append(Perm(tuple(images)))
        else:
            gens.append(NegId())
    return EnWord(tuple(gens))


def test_inverse_word_evaluates_to_the_inverse(ring, rng):
    for _ in range(20):
        word = _random_word(ring, rng, 3, 8)
        assert (en_eval(word, 3, ring) * en_eval(word.inverse(ring), 3, ring)).is_identity()


def test_en_eval_is_multiplicative(ring, rng):
    for n in (2, 3, 4):
        first = _random_word(ring, rng, n, 6)
        second = _random_word(ring, rng, n, 6)
        assert en_eval(first + second, n, ring) == en_eval(first, n, ring) * en_eval(second, n, ring)


def test_decomposition_does_few_matrix_products(monkeypatch, rng):
    products = []
    multiply = RingMatrix.__mul__

    def counted(self, other):
        products.append(1)
        return multiply(self, other)

    monkeypatch.setattr(RingMatrix, "__mul__", counted)
    ring = PolynomialRing(2)
    decomp = two_units_decompose(random_matrix(ring, 4, rng))
    # M * M^-1 and M^-1 * M for each summand, once
    assert len(products) == 4
    assert decomp.verify()
    decomp.to_json()
    assert len(products) == 4


def test_word_json_survives_a_round_trip():
    ring = HurwitzRing()
    word = EnWord((Elem(HurwitzQuat.parse("1+i"), 1, 2), Perm((2, 1)), NegId()))
    assert EnWord.from_json(word.to_json(ring), ring) == word


def test_diagonal_split_example():
    split = diagonal_split(zmat([[3, 0], [0, 5]]))
    assert split.first.matrix == zmat([[3, 1], [-1, 0]])
    assert split.second.matrix == zmat([[0, -1], [1, 5]])
    assert split.verify()


def test_zero_matrix_split():
    split = diagonal_split(zmat([[0, 0], [0, 0]]))
    assert split.first.matrix == zmat([[0, 1], [-1, 0]])
    assert split.second.matrix == zmat([[0, -1], [1, 0]])


def test_polynomial_diagonal_split():
    ring = PolynomialRing(2)
    D = RingMatrix.diagonal_matrix(ring, [ring.poly([1, 1]), ring.poly([0, 1]), ring.one()])
    split = diagonal_split(D)
    assert split.verify()
    assert split.first.word is not None and split.second.word is not None


@pytest.mark.parametrize("n", [2, 3, 5])
def test_diagonal_split_any_size(n, rng):
    D = RingMatrix.diagonal_matrix(Z, [rng.randint(-20, 20) for _ in range(n)])
    assert diagonal_split(D).verify()


def test_diagonal_split_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        diagonal_split(zmat([[4]]))
    with pytest.raises(InvalidInputError):
        diagonal_split(zmat([[1, 2], [0, 1]]))


def test_distinct_split_example():
    plain, mirrored = distinct_split(zmat([[3, 0], [0, 5]]))
    assert mirrored.first.matrix == zmat([[3, -1], [1, 0]])
    assert mirrored.second.matrix == zmat([[0, 1], [-1, 5]])
    assert plain.verify() and mirrored.verify()
    assert plain.first.matrix != mirrored.first.matrix


def test_distinct_split_of_identity():
    plain, mirrored = distinct_split(RingMatrix.identity(Z, 2))
    assert plain.verify() and mirrored.verify()
    assert plain.first.matrix != mirrored.first.matrix
    assert plain.first.matrix != plain.second.matrix


def test_distinct_split_needs_one_not_minus_one():
    ring = PolynomialRing(2)
    with pytest.raises(HypothesisFailure):
        distinct_split(RingMatrix.identity(ring, 2))


def test_diagonalize_integers():
    A = zmat([[2, 4], [6, 8]])
    U, V, D = diagonalize(A)
    assert D.is_diagonal()
    assert en_eval(U, 2, Z) * A * en_eval(V, 2, Z) == D
    assert sorted(abs(x) for x in D.diagonal()) == [2, 4]
    assert abs(det2(D)) == abs(det2(A)) == 8


def test_diagonalize_leaves_diagonal_matrices_alone():
    U, V, D = diagonalize(zmat([[2, 0], [0, 3]]))
    assert len(U) == 0 and len(V) == 0
    assert D == zmat([[2, 0], [0, 3]])


def test_diagonalize_quaternions():
    ring = HurwitzRing()
    i, j, k = (HurwitzQuat.parse(s) for s in ("i", "j", "k"))
    A = RingMatrix(ring, [[i, j], [ring.zero(), k]])
    U, V, D = diagonalize(A)
    assert D.is_diagonal()
    assert en_eval(U, 2, ring) * A * en_eval(V, 2, ring) == D


def test_diagonalize_preserves_determinant_up_to_sign(rng):
    for _ in range(50):
        A = zmat([[rng.randint(-30, 30) for _ in range(2)] for _ in range(2)])
        U, V, D = diagonalize(A)
        assert abs(det2(D)) == abs(det2(A))
        assert det2(en_eval(U, 2, Z)) in (1, -1)
        assert det2(en_eval(V, 2, Z)) in (1, -1)


def test_two_units_examples():
    decomp = two_units_decompose(zmat([[1, 2], [3, 4]]))
    assert decomp.verify()
    assert det2(decomp.first.matrix) in (1, -1)
    assert det2(decomp.second.matrix) in (1, -1)
    assert two_units_decompose(RingMatrix.identity(Z, 2)).verify()
    with pytest.raises(InvalidInputError):
        two_units_decompose(zmat([[7]]))


def test_two_units_quaternion_matrix(rng):
    ring = HurwitzRing()
    A = RingMatrix(ring, [[ring.random_element(rng, 10) for _ in range(2)] for _ in range(2)])
    decomp = two_units_decompose(A)
    assert decomp.verify()
    for summand in (decomp.first, decomp.second):
        inverse = en_eval(summand.word.inverse(ring), 2, ring)
        assert (summand.matrix * inverse).is_identity()


def test_decomposition_json():
    payload = two_units_decompose(zmat([[1, 2], [3, 4]])).to_json()
    assert payload["ring"] == "z" and payload["verified"]
    assert payload["target"] == [[1, 2], [3, 4]]
    assert "word" in payload["first"]


def test_random_suite_two_by_two(ring, rng):
    rows = random_suite(ring, 2, 100, rng)
    assert len(rows) == 100
    assert all(row["verified"] for row in rows)


@pytest.mark.parametrize("n", [3, 4])
def test_random_suite_larger(ring, n, rng):
    assert all(row["verified"] for row in random_suite(ring, n, 10, rng))


@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 4])
def test_random_suite_full(ring, n, rng):
    assert all(row["verified"] for row in random_suite(ring, n, 100, rng, threads=4))


def test_random_suite_threads_keep_order():
    serial = random_suite(Z, 3, 12, random.Random(4))
    threaded = random_suite(Z, 3, 12, random.Random(4), threads=4)
    assert serial == threaded


def test_matrix_inverse():
    word = EnWord((Elem(3, 1, 2), Perm((2, 1)), Elem(-2, 2, 1), NegId()))
    M = en_eval(word, 2, Z)
    assert (matrix_inverse(M) * M).is_identity()
    with pytest.raises(NotInvertibleError):
        matrix_inverse(zmat([[2, 0], [0, 1]]))


def test_equivalence_transfer():
    D = zmat([[3, 0], [0, 5]])
    decomp = diagonal_split(D)
    identity = RingMatrix.identity(Z, 2)

    same = equivalence_transfer(decomp, identity, identity)
    assert same.target == D and same.verify()
    assert same.first.matrix == decomp.first.matrix

    U = EnWord((Elem(1, 1, 2),))
    moved = equivalence_transfer(decomp, U, EnWord())
    assert moved.verify()
    assert moved.target == zmat([[3, 5], [0, 5]])

    negated = equivalence_transfer(decomp, EnWord((NegId(),)), EnWord())
    assert negated.target == -D
    assert negated.first.matrix == -decomp.first.matrix

    back = equivalence_transfer(moved, U.inverse(Z), EnWord())
    assert back.target == D and back.verify()


def test_equivalence_transfer_needs_units():
    decomp = diagonal_split(zmat([[3, 0], [0, 5]]))
    with pytest.raises(NotInvertibleError):
        equivalence_transfer(decomp, zmat([[2, 0], [0, 1]]), RingMatrix.identity(Z, 2))


def test_vamos_witness_rejects_class_number_one():
    with pytest.raises(HypothesisFailure):
        vamos_witness(1)
    with pytest.raises(InvalidInputError):
        vamos_witness(-5)


def test_vamos_witness_d5():
    A, report = vamos_witness(5, height_bound=3)
    order = QuadraticOrder(-5)
    assert A[0][0] == order.integer(3)
    assert A[1][0] == order.from_basis(1, 1)
    assert not report.found
    assert report.candidates_checked == 7 ** 4
    assert report.to_json()["decompositions_found"] == 0
    assert report.ideal.startswith("(3, ")


@pytest.mark.slow
def test_vamos_witness_d5_height_ten():
    _, report = vamos_witness(5, height_bound=10)
    assert not report.found
    assert report.candidates_checked == 21 ** 4


def test_principal_looking_matrix_decomposes():
    order = QuadraticOrder(-5)
    zero = order.zero
    A = ((order.integer(2), zero), (order.from_basis(1, 1), zero))
    report = search_two_unit_decompositions(A, order, 2)
    assert report.found
    m1, m2 = report.decompositions[0]
    for i in range(2):
        for j in range(2):
            assert m1[i][j] + m2[i][j] == A[i][j]
    for m in (m1, m2):
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        assert det.is_unit()
