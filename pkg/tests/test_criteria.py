from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from criteria import (
    CONJECTURE,
    THEOREM,
    CubicFieldData,
    UnitSumClass,
    Verdict,
    cubic_usn,
    determinant_upper_bound,
    erdos_family,
    erdos_family_scan,
    power_basis_units,
    pure_cubic_data,
    quadratic_usn,
    widmer_bound,
    widmer_index_check,
    widmer_sufficient,
)
from errors import InvalidInputError
from quadratic import QuadraticOrder, is_squarefree
from unit_sums import unit_sum_lengths

QUADRATIC_TRUTH = {
    -1: Verdict.OMEGA, -3: Verdict.OMEGA, -2: Verdict.INFINITE, -5: Verdict.INFINITE,
    -7: Verdict.INFINITE, -11: Verdict.INFINITE, 2: Verdict.OMEGA, 3: Verdict.OMEGA,
    5: Verdict.OMEGA, 6: Verdict.INFINITE, 7: Verdict.INFINITE, 10: Verdict.OMEGA,
    11: Verdict.INFINITE, 13: Verdict.OMEGA, 14: Verdict.INFINITE, 15: Verdict.OMEGA,
    17: Verdict.INFINITE, 21: Verdict.OMEGA, 29: Verdict.OMEGA, 37: Verdict.INFINITE,
}


@pytest.mark.parametrize("d,expected", sorted(QUADRATIC_TRUTH.items()))
def test_quadratic_ground_truth(d, expected):
    assert quadratic_usn(d).tag is expected


def test_quadratic_rejects_bad_input():
    for d in (4, 0, 1, -4, 12):
        with pytest.raises(InvalidInputError):
            quadratic_usn(d)


def test_quadratic_verdicts_are_theorem_backed():
    result = quadratic_usn(2)
    assert result.basis == THEOREM
    assert "square" in result.witness
    assert result.to_json()["verdict"] == "omega"


@pytest.mark.parametrize("d,expected", [
    (28, Verdict.OMEGA), (2, Verdict.OMEGA), (-2, Verdict.OMEGA), (7, Verdict.OMEGA),
    (10, Verdict.INFINITE), (3, Verdict.INFINITE), (26, Verdict.INFINITE), (12, Verdict.INFINITE),
])
def test_cubic_ground_truth(d, expected):
    assert cubic_usn(d).tag is expected


def test_cubic_rejects_bad_input():
    for d in (8, 16, 1, -1, 0, 54):
        with pytest.raises(InvalidInputError):
            cubic_usn(d)


def test_unit_sum_class_order():
    two = UnitSumClass(Verdict.EXACT, k=2)
    three = UnitSumClass(Verdict.EXACT, k=3)
    omega = UnitSumClass(Verdict.OMEGA)
    infinite = UnitSumClass(Verdict.INFINITE)
    assert two < three < omega < infinite
    assert sorted([infinite, two, omega, three]) == [two, three, omega, infinite]
    with pytest.raises(TypeError):
        _ = UnitSumClass(Verdict.INCONCLUSIVE) < omega


@pytest.mark.parametrize("abs_disc,regulator,expected", [
    (31, "0.6932", Verdict.OMEGA),
    (100, "2.0", Verdict.INCONCLUSIVE),
    (108, "1.3475", Verdict.OMEGA),
])
def test_widmer_sufficient_examples(abs_disc, regulator, expected):
    assert widmer_sufficient(CubicFieldData(abs_disc, regulator)).tag is expected


def test_widmer_bound_values():
    assert abs(float(mpmath.mpf(widmer_bound(mpmath.mpf("1.3475")).mid)) - 93.7) < 0.1
    assert abs(float(mpmath.mpf(widmer_bound(mpmath.mpf("2.0")).mid)) - 490) < 1
    # the Widmer right side is the square of the determinant bound
    r = mpmath.mpf("1.1")
    assert abs(float(mpmath.mpf(determinant_upper_bound(r).mid)) ** 2 - float(mpmath.mpf(widmer_bound(r).mid))) < 1e-9


def test_cubic_data_validation():
    with pytest.raises(InvalidInputError):
        CubicFieldData(0, "1.0")
    with pytest.raises(InvalidInputError):
        CubicFieldData(31, "-1")


def test_regulator_bound_is_never_rounded_down():
    # 0.3 and 1/3 both round down to the nearest double
    assert CubicFieldData(31, "0.3").regulator_upper >= mpmath.mpf("0.3", prec=300)
    with mpmath.workprec(300):
        third = mpmath.mpf(1) / 3
    assert CubicFieldData(31, third).regulator_upper >= third
    _, data = erdos_family(3)
    with mpmath.workprec(300):
        assert data.regulator_upper >= mpmath.log(mpmath.mpf(3) + mpmath.mpf(1) / 9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5000), st.integers(1, 5000), st.decimals("0.05", "4", places=4), st.decimals("0", "1", places=4))
def test_widmer_sufficient_is_monotone(disc, extra, regulator, drop):
    base = widmer_sufficient(CubicFieldData(disc, str(regulator)))
    if base.tag is not Verdict.OMEGA:
        return
    smaller = max(regulator - drop, regulator / 2)
    assert widmer_sufficient(CubicFieldData(disc + extra, str(smaller))).tag is Verdict.OMEGA


def test_pure_cubic_routes_agree():
    data = pure_cubic_data()
    assert cubic_usn(2).tag is Verdict.OMEGA
    assert widmer_sufficient(data).tag is Verdict.OMEGA
    index = widmer_index_check(data)
    assert index.tag is Verdict.OMEGA
    assert "index m=1" in index.witness


def test_index_check_sees_sublattice():
    squared = pure_cubic_data().power(2)
    result = widmer_index_check(squared)
    assert result.tag is Verdict.INFINITE
    assert "index m=1," not in result.witness


def test_index_check_rejects_real_embedding():
    data = CubicFieldData(108, "1.0", eta=mpmath.mpf(4), x=mpmath.mpf("0.5"), y=mpmath.mpf(0))
    with pytest.raises(InvalidInputError):
        widmer_index_check(data)


def test_index_check_needs_embedding():
    with pytest.raises(InvalidInputError):
        widmer_index_check(CubicFieldData(108, "1.3475"))


def test_erdos_family_examples():
    admissible, data = erdos_family(1)
    assert admissible and data.abs_disc == 31
    assert widmer_sufficient(data).tag is Verdict.OMEGA

    admissible, data = erdos_family(2)
    assert admissible and data.abs_disc == 59
    assert widmer_sufficient(data).tag is Verdict.OMEGA

    admissible, data = erdos_family(3)
    assert not admissible and data.abs_disc == 135


def test_erdos_family_scan_up_to_100():
    rows = erdos_family_scan(100)
    assert [r["N"] for r in rows] == list(range(1, 101))
    admissible = [r for r in rows if r["admissible"]]
    assert admissible
    assert all(r["verdict"] == "omega" for r in admissible)
    assert all(is_squarefree(r["abs_disc"]) for r in admissible)


@pytest.mark.parametrize("N", [1, 2, 5, 10, 37, 100])
def test_erdos_root_bounds(N):
    _, data = erdos_family(N)
    lo, hi = data.root_interval
    assert hi - lo <= Fraction(1, 2 ** 64)
    assert Fraction(N * N, N ** 3 + 1) < -hi
    assert -lo < Fraction(1, N)


def test_power_basis_examples():
    result = power_basis_units(4, 2)
    assert result.holds and result.basis == THEOREM
    assert result.a == 1 and result.sign == 1
    assert not power_basis_units(4, 5).holds
    with pytest.raises(InvalidInputError):
        power_basis_units(4, 16)
    conjectural = power_basis_units(5, 33)
    assert conjectural.holds and conjectural.basis == CONJECTURE
    assert conjectural.to_json() == {"verdict": True, "basis": "conjecture", "witness": "m = 2^d + 1"}


def test_power_basis_irreducibility():
    with pytest.raises(InvalidInputError):
        power_basis_units(6, 8)
    with pytest.raises(InvalidInputError):
        power_basis_units(8, -4)
    assert power_basis_units(3, 9).holds
    assert power_basis_units(3, 7).holds


@pytest.mark.parametrize("d", [d for d in range(-20, 21) if d not in (0, 1) and is_squarefree(d)
                               and quadratic_usn(d).tag is Verdict.OMEGA])
def test_omega_fields_generate_small_elements(d):
    lengths = unit_sum_lengths(QuadraticOrder(d), 5, max_terms=20)
    assert all(t is not None for t in lengths.values())
