"""
Decision procedures for unit sum numbers and power bases of units.
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Optional, Tuple

import mpmath
from mpmath import iv

from errors import InvalidInputError, PrecisionError, UnverifiableError
from quadratic import is_cubefree, is_perfect_power, is_squarefree
from sympy import integer_nthroot, primefactors

logger = logging.getLogger(__name__)

THEOREM = "theorem"
CONJECTURE = "conjecture"


class Verdict(Enum):
    EXACT = "exact"
    OMEGA = "omega"
    INFINITE = "infinite"
    INCONCLUSIVE = "inconclusive"


@total_ordering
@dataclass(frozen=True)
class UnitSumClass:
    """Value of u(R), ordered by k < omega < infinity."""

    tag: Verdict
    k: Optional[int] = None
    witness: str = ""
    basis: str = THEOREM

    def _rank(self):
        if self.tag is Verdict.INCONCLUSIVE:
            raise TypeError("an inconclusive verdict has no place in the order")
        if self.tag is Verdict.EXACT:
            return (0, self.k)
        return (1, 0) if self.tag is Verdict.OMEGA else (2, 0)

    def __lt__(self, other):
        if not isinstance(other, UnitSumClass):
            return NotImplemented
        return self._rank() < other._rank()

    def __eq__(self, other):
        if not isinstance(other, UnitSumClass):
            return NotImplemented
        return (self.tag, self.k) == (other.tag, other.k)

    def __hash__(self):
        return hash((self.tag, self.k))

    def to_json(self):
        payload = {"verdict": self.tag.value, "witness": self.witness, "basis": self.basis}
        if self.k is not None:
            payload["k"] = self.k
        return payload


def omega(witness, basis=THEOREM):
    return UnitSumClass(Verdict.OMEGA, witness=witness, basis=basis)


def infinite(witness, basis=THEOREM):
    return UnitSumClass(Verdict.INFINITE, witness=witness, basis=basis)


def _is_square(n):
    return n >= 0 and integer_nthroot(n, 2)[1]


def quadratic_usn(d: int) -> UnitSumClass:
    """u(R) for the ring of integers of Q(sqrt(d))."""
    if d in (0, 1):
        raise InvalidInputError(f"degenerate field parameter d={d}")
    if not is_squarefree(d):
        raise InvalidInputError(f"d={d} is not squarefree")
    if d < 0:
        if d in (-1, -3):
            return omega(f"d={d}: imaginary field with extra roots of unity")
        return infinite(f"d={d}: imaginary field with units +-1 only")
    if d % 4 != 1:
        for shift in (1, -1):
            if _is_square(d + shift):
                return omega(f"d={d} not 1 mod 4 and d{shift:+d} = {d + shift} is a square")
        return infinite(f"d={d} not 1 mod 4; neither {d + 1} nor {d - 1} is a square")
    for shift in (4, -4):
        if _is_square(d + shift):
            return omega(f"d={d} = 1 mod 4 and d{shift:+d} = {d + shift} is a square")
    return infinite(f"d={d} = 1 mod 4; neither {d + 4} nor {d - 4} is a square")


def cubic_usn(d: int) -> UnitSumClass:
    """u(R) for the ring of integers of Q(cbrt(d))."""
    if abs(d) <= 1:
        raise InvalidInputError(f"|d| must exceed 1, got {d}")
    if not is_cubefree(d):
        raise InvalidInputError(f"d={d} is not cubefree")
    if is_perfect_power(d, 3):
        raise InvalidInputError(f"d={d} is a perfect cube")
    # Q(cbrt(d)) = Q(cbrt(-d))
    m = abs(d)
    if m == 28:
        return omega("d=28 is the exceptional case")
    if not is_squarefree(m):
        return infinite(f"d={m} is not squarefree")
    if m % 9 in (1, 8):
        return infinite(f"d={m} = +-1 mod 9")
    for shift in (1, -1):
        if is_perfect_power(m + shift, 3):
            return omega(f"d={m} squarefree, not +-1 mod 9, d{shift:+d} = {m + shift} is a cube")
    return infinite(f"neither {m + 1} nor {m - 1} is a cube")


@dataclass(frozen=True)
class CubicFieldData:
    """Discriminant, a regulator upper bound and optional embedding data.

    eta is a real unit > 1 and x + iy a non-real conjugate of it.
    """

    abs_disc: int
    regulator_upper: mpmath.mpf
    eta: Optional[mpmath.mpf] = None
    x: Optional[mpmath.mpf] = None
    y: Optional[mpmath.mpf] = None
    prec: int = 128
    label: str = ""
    root_interval: Optional[Tuple[Fraction, Fraction]] = field(default=None, compare=False)

    def __post_init__(self):
        # round up so the bound stays an upper bound
        object.__setattr__(self, "regulator_upper", mpmath.mpf(self.regulator_upper, prec=self.prec, rounding="c"))
        if self.abs_disc <= 0:
            raise InvalidInputError(f"abs_disc must be positive, got {self.abs_disc}")
        if self.regulator_upper <= 0:
            raise InvalidInputError(f"regulator_upper must be positive, got {self.regulator_upper}")
        if self.has_embedding:
            with mpmath.workprec(self.prec):
                gap = abs(self.x ** 2 + self.y ** 2 - 1 / self.eta)
                if gap > mpmath.ldexp(1, 16 - self.prec) * max(1, abs(self.eta)):
                    raise InvalidInputError(f"embedding data inconsistent: |x^2 + y^2 - 1/eta| = {mpmath.nstr(gap, 5)}")

    @property
    def has_embedding(self):
        return self.eta is not None and self.x is not None and self.y is not None

    def power(self, k):
        """Data for the unit eta**k (same field)."""
        if not self.has_embedding:
            raise InvalidInputError("power() needs embedding data")
        with mpmath.workprec(self.prec):
            conj = mpmath.mpc(self.x, self.y) ** k
            return replace(self, eta=self.eta ** k, x=conj.real, y=conj.imag,
                           regulator_upper=self.regulator_upper * k,
                           label=f"{self.label}^{k}" if self.label else f"eta^{k}")

    def to_json(self):
        payload = {"abs_disc": self.abs_disc,
                   "regulator_upper": mpmath.nstr(self.regulator_upper, 20),
                   "label": self.label}
        if self.has_embedding:
            payload.update(eta=mpmath.nstr(self.eta, 30), x=mpmath.nstr(self.x, 30), y=mpmath.nstr(self.y, 30))
        return payload


def complex_cubic_data(min_poly, abs_disc, regulator_upper=None, prec=128, label=""):
    """CubicFieldData for a unit given by its (monic) minimal polynomial.

    log(eta) bounds the regulator for any unit eta > 1, so it is the
    default regulator_upper.
    """
    with mpmath.workprec(prec + 32):
        roots = mpmath.polyroots([mpmath.mpf(c) for c in min_poly], maxsteps=200, extraprec=2 * prec)
        tiny = mpmath.ldexp(1, -prec // 2)
        real = [mpmath.re(r) for r in roots if abs(mpmath.im(r)) < tiny]
        nonreal = [r for r in roots if mpmath.im(r) >= tiny]
        if len(real) != 1 or len(nonreal) != 1:
            raise InvalidInputError(f"{min_poly} does not define a complex cubic field")
        eta = real[0]
        if eta <= 1:
            raise InvalidInputError(f"real root {mpmath.nstr(eta, 10)} is not a unit > 1")
        if regulator_upper is None:
            regulator_upper = mpmath.log(eta) * (1 + mpmath.ldexp(1, -prec))
        return CubicFieldData(abs_disc, regulator_upper, eta=+eta, x=+nonreal[0].real,
                              y=+nonreal[0].imag, prec=prec, label=label)


def pure_cubic_data(prec=128):
    """Q(cbrt(2)) with eta = 1 + cbrt(2) + cbrt(4), a root of X^3 - 3X^2 - 3X - 1."""
    return complex_cubic_data([1, -3, -3, -1], 108, prec=prec, label="Q(cbrt(2))")


@contextmanager
def _iv_precision(prec):
    saved = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = saved


def _upper(x, digits):
    return mpmath.nstr(mpmath.mpf(x.b), digits)


def widmer_bound(regulator):
    """(e^{3R/4} + e^{-3R/4})^4 as a certified interval."""
    r = iv.mpf(mpmath.mpf(regulator))
    return (iv.exp(3 * r / 4) + iv.exp(-3 * r / 4)) ** 4


def determinant_upper_bound(regulator):
    """eta^{-3/2} + 2 + eta^{3/2} with eta = e^R, as a certified interval."""
    r = iv.mpf(mpmath.mpf(regulator))
    return iv.exp(-3 * r / 2) + 2 + iv.exp(3 * r / 2)


def widmer_sufficient(data: CubicFieldData) -> UnitSumClass:
    """One-sided test: omega when |Delta| exceeds the regulator expression."""
    with _iv_precision(data.prec):
        rhs = widmer_bound(data.regulator_upper)
        if data.abs_disc > mpmath.mpf(rhs.b):
            return omega(f"|Delta|={data.abs_disc} > {_upper(rhs, 8)} at R<={mpmath.nstr(data.regulator_upper, 8)}")
        return UnitSumClass(
            Verdict.INCONCLUSIVE,
            witness=f"|Delta|={data.abs_disc} <= {_upper(rhs, 8)}; criterion is one-sided",
        )


def _ball(value, prec):
    value = mpmath.mpf(value)
    radius = mpmath.ldexp(max(abs(value), 1), 8 - prec)
    return iv.mpf([value - radius, value + radius])


def widmer_index_check(data: CubicFieldData) -> UnitSumClass:
    """Index m of Z[eta] in the maximal order from the embedding determinant.

    det [[1, eta, eta^2], [1, x, x^2 - y^2], [0, y, 2xy]] = y((x - eta)^2 + y^2)
    equals m * sqrt|Delta| / 2; omega iff m = 1.
    """
    if not data.has_embedding:
        raise InvalidInputError("widmer_index_check needs embedding data")
    if data.y == 0:
        raise InvalidInputError("y = 0: data does not describe a complex cubic field")
    with _iv_precision(data.prec):
        eta, x, y = (_ball(v, data.prec) for v in (data.eta, data.x, data.y))
        det = abs(y * ((x - eta) ** 2 + y ** 2))
        ratio = det / (iv.sqrt(iv.mpf(data.abs_disc)) / 2)
        lo, hi = mpmath.mpf(ratio.a), mpmath.mpf(ratio.b)
        m = int(mpmath.nint((lo + hi) / 2))
        if m < 1 or lo <= m - 0.1 or hi >= m + 0.1:
            raise PrecisionError(
                f"indeterminate at precision {data.prec}: ratio in [{mpmath.nstr(lo, 10)}, {mpmath.nstr(hi, 10)}]")
        bound = determinant_upper_bound(data.regulator_upper)
        det_mid = mpmath.mpf(det.mid)
        logger.debug("index check %s: det=%s ratio=%s bound=%s", data.label,
                     mpmath.nstr(det_mid, 12), mpmath.nstr(lo, 12), _upper(bound, 12))
    detail = f"|det|={mpmath.nstr(det_mid, 12)}, index m={m}, det bound {_upper(bound, 8)}"
    if m == 1:
        return omega(f"Z[eta] is the maximal order; {detail}")
    return infinite(f"Z[eta] has index {m}; {detail}")


def _isolate_erdos_root(N, min_bits=64, max_bits=512):
    """Bracket the real root of X^3 + N X + 1 in [-1, 0] by rational bisection.

    Stops once the width is below 2^-min_bits and both root bounds
    N^2/(N^3+1) < -alpha < 1/N are certified by the bracket.
    """
    def f(t):
        return t ** 3 + N * t + 1

    lo, hi = Fraction(-1), Fraction(0)
    lower = Fraction(N * N, N ** 3 + 1)
    upper = Fraction(1, N)
    for step in range(max_bits):
        if step >= min_bits and lower < -hi and -lo < upper:
            return lo, hi
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    raise PrecisionError(f"root bounds for N={N} not certified at 2^-{max_bits}")


def erdos_family(N: int, prec=128):
    """(admissible, data) for the field of X^3 + N X + 1."""
    if N < 1:
        raise InvalidInputError(f"N must be positive, got {N}")
    disc = 4 * N ** 3 + 27
    admissible = is_squarefree(disc)
    lo, hi = _isolate_erdos_root(N)
    with _iv_precision(prec):
        regulator_upper = mpmath.mpf(iv.ln(iv.mpf(N) + iv.mpf(1) / (N * N)).b, prec=prec, rounding="c")
    # eta = -1/alpha is a root of X^3 - N X^2 - 1
    data = complex_cubic_data([1, -N, 0, -1], disc, regulator_upper=regulator_upper, prec=prec,
                              label=f"X^3+{N}X+1")
    data = replace(data, root_interval=(lo, hi))
    return admissible, data


def erdos_family_scan(n_max, prec=128):
    """Verdict rows for N = 1..n_max."""
    rows = []
    for N in range(1, n_max + 1):
        try:
            admissible, data = erdos_family(N, prec=prec)
        except UnverifiableError as exc:
            rows.append({"N": N, "admissible": None, "verdict": "unverifiable", "witness": str(exc)})
            continue
        row = {"N": N, "admissible": admissible, "abs_disc": data.abs_disc,
               "regulator_upper": mpmath.nstr(data.regulator_upper, 12)}
        if admissible:
            row.update(widmer_sufficient(data).to_json())
        rows.append(row)
    return rows


@dataclass(frozen=True)
class PowerBasisVerdict:
    holds: bool
    basis: str
    a: Optional[int] = None
    sign: Optional[int] = None

    def to_json(self):
        payload = {"verdict": self.holds, "basis": self.basis}
        if self.holds:
            payload["witness"] = f"m = {self.a}^d {'+' if self.sign > 0 else '-'} 1"
        return payload


def _signed_root(n, d):
    if n < 0:
        return -integer_nthroot(-n, d)[0]
    return integer_nthroot(n, d)[0]


def power_basis_units(d: int, m: int) -> PowerBasisVerdict:
    """Does Z[m^(1/d)] have a power basis of units?  True iff m = a^d +- 1."""
    if d < 2 or m == 0:
        raise InvalidInputError(f"need d >= 2 and m != 0, got d={d}, m={m}")
    for p in primefactors(d):
        if is_perfect_power(m, p):
            raise InvalidInputError(f"m={m} is a perfect {p}-th power: root has degree < {d}")
    if d % 4 == 0 and m < 0 and (-m) % 4 == 0 and is_perfect_power(-m // 4, 4):
        raise InvalidInputError(f"m={m} = -4b^4: X^{d} - m is reducible")
    if d == 4 and m <= 1:
        raise InvalidInputError("the quartic case requires m > 1")
    basis = THEOREM if d <= 4 else CONJECTURE
    for sign in (1, -1):
        t = m - sign
        if is_perfect_power(t, d):
            return PowerBasisVerdict(True, basis, a=_signed_root(t, d), sign=sign)
    return PowerBasisVerdict(False, basis)
