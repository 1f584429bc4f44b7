"""
Exact arithmetic in the maximal order of Q(sqrt(d)).

Elements are stored as (u + v*sqrt(d)) / 2 with integers u, v. Real fields
use the embedding with sqrt(d) > 0 throughout.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import mpmath
from sympy import factorint, integer_nthroot, isprime

from errors import HypothesisFailure, InvalidInputError, NotInvertibleError, UnverifiableError

logger = logging.getLogger(__name__)

TRIAL_DIVISION_LIMIT = 10**6
MAX_CF_STEPS = 10**6


def is_perfect_power(n, k):
    """True when n = a**k for an integer a (negative n allowed for odd k)."""
    if n < 0:
        if k % 2 == 0:
            return False
        n = -n
    return integer_nthroot(n, k)[1]


def is_power_free(n, k):
    """True when no prime power p**k divides n.

    Primes up to TRIAL_DIVISION_LIMIT are removed by trial division; the
    cofactor is decided when it is prime, an exact k-th power, or too small
    to hide a k-th power of a large prime. Anything else is unverifiable.
    """
    n = abs(n)
    if n == 0:
        return False
    factors = factorint(n, limit=TRIAL_DIVISION_LIMIT, use_rho=False, use_pm1=False)
    partial = {}
    for f, e in sorted(factors.items()):
        if e >= k:
            return False
        if f <= TRIAL_DIVISION_LIMIT or isprime(f):
            partial[f] = e
            continue
        if integer_nthroot(f, k)[1]:
            return False
        if f < TRIAL_DIVISION_LIMIT ** (k + 1):
            partial[f] = e
            continue
        raise UnverifiableError(
            f"cannot certify that {n} is {k}-th power free: cofactor {f} unfactored",
            partial_factorization=partial,
        )
    return True


def is_squarefree(n):
    return is_power_free(n, 2)


def is_cubefree(n):
    return is_power_free(n, 3)


def sign_sqrt(a, b, d):
    """Sign of a + b*sqrt(d) for d > 0 not a square, exactly."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    if a * a > b * b * d:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


@dataclass(frozen=True)
class QuadraticOrder:
    """Maximal order of Q(sqrt(d)), d squarefree and not 0 or 1."""

    d: int

    def __post_init__(self):
        if self.d in (0, 1):
            raise InvalidInputError(f"degenerate field parameter d={self.d}")
        if not is_squarefree(self.d):
            raise InvalidInputError(f"d={self.d} is not squarefree")

    @property
    def half_basis(self):
        return self.d % 4 == 1

    @property
    def is_real(self):
        return self.d > 0

    def elt(self, u, v):
        return QuadraticElt(self, u, v)

    def integer(self, n):
        return QuadraticElt(self, 2 * n, 0)

    def from_basis(self, a, b):
        """a + b*omega with omega = (1 + sqrt(d))/2 or sqrt(d)."""
        if self.half_basis:
            return QuadraticElt(self, 2 * a + b, b)
        return QuadraticElt(self, 2 * a, 2 * b)

    @property
    def omega(self):
        return self.from_basis(0, 1)

    @property
    def zero(self):
        return self.integer(0)

    @property
    def one(self):
        return self.integer(1)

    def box(self, height):
        """All elements of coordinate height <= height, in (a, b) order."""
        return [self.from_basis(a, b)
                for a in range(-height, height + 1)
                for b in range(-height, height + 1)]

    def __str__(self):
        return f"O(Q(sqrt({self.d})))"


@dataclass(frozen=True)
class QuadraticElt:
    order: QuadraticOrder
    u: int
    v: int

    def __post_init__(self):
        if self.order.half_basis:
            if (self.u - self.v) % 2:
                raise InvalidInputError(f"u={self.u}, v={self.v} must share parity for d={self.order.d}")
        elif self.u % 2 or self.v % 2:
            raise InvalidInputError(f"u={self.u}, v={self.v} must be even for d={self.order.d}")

    @property
    def d(self):
        return self.order.d

    def _coerce(self, other):
        if isinstance(other, int):
            return self.order.integer(other)
        if isinstance(other, QuadraticElt):
            if other.order != self.order:
                raise InvalidInputError("elements of different orders")
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticElt(self.order, self.u + other.u, self.v + other.v)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticElt(self.order, self.u - other.u, self.v - other.v)

    def __rsub__(self, other):
        return -self + other

    def __neg__(self):
        return QuadraticElt(self.order, -self.u, -self.v)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadraticElt(
            self.order,
            (self.u * other.u + self.d * self.v * other.v) // 2,
            (self.u * other.v + self.v * other.u) // 2,
        )

    __rmul__ = __mul__

    def __pow__(self, k):
        base = self if k >= 0 else self.inverse()
        result = self.order.one
        k = abs(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def norm(self):
        return (self.u * self.u - self.d * self.v * self.v) // 4

    def conjugate(self):
        return QuadraticElt(self.order, self.u, -self.v)

    def is_zero(self):
        return self.u == 0 and self.v == 0

    def is_unit(self):
        return abs(self.norm()) == 1

    def inverse(self):
        n = self.norm()
        if abs(n) != 1:
            raise NotInvertibleError(f"{self} is not a unit (norm {n})")
        return self.conjugate() * n

    def exact_div(self, other):
        """self / other when the quotient lies in the order, else None."""
        n = other.norm()
        if n == 0:
            raise InvalidInputError("division by zero")
        p = self * other.conjugate()
        if p.u % n or p.v % n:
            return None
        u, v = p.u // n, p.v // n
        if self.order.half_basis and (u - v) % 2:
            return None
        if not self.order.half_basis and (u % 2 or v % 2):
            return None
        return QuadraticElt(self.order, u, v)

    def basis_coords(self):
        """(a, b) with self = a + b*omega."""
        if self.order.half_basis:
            return (self.u - self.v) // 2, self.v
        return self.u // 2, self.v // 2

    def height(self):
        a, b = self.basis_coords()
        return max(abs(a), abs(b))

    def sign(self):
        """Sign in the real embedding."""
        if not self.order.is_real:
            raise InvalidInputError("sign is defined for real fields only")
        return sign_sqrt(self.u, self.v, self.d)

    def sigma(self, conjugate=False, prec=None):
        """Value in the fixed embedding (or its conjugate) as an mpmath number."""
        bits = max(self.u.bit_length(), self.v.bit_length(), 1)
        with mpmath.workprec(prec or 2 * bits + 64):
            v = -self.v if conjugate else self.v
            root = mpmath.sqrt(mpmath.mpf(self.d)) if self.d > 0 else mpmath.sqrt(mpmath.mpc(self.d))
            return (mpmath.mpf(self.u) + v * root) / 2

    def to_json(self):
        return {"d": self.d, "u": self.u, "v": self.v}

    def __str__(self):
        def half(x):
            return str(x // 2) if x % 2 == 0 else f"{x}/2"

        if self.v == 0:
            return half(self.u)
        root = f"sqrt({self.d})"
        coeff = half(abs(self.v))
        irr = root if coeff == "1" else f"{coeff}*{root}"
        if self.u == 0:
            return f"-{irr}" if self.v < 0 else irr
        return f"{half(self.u)} {'-' if self.v < 0 else '+'} {irr}"


@dataclass(frozen=True)
class FundamentalUnitResult:
    unit: QuadraticElt
    regulator: mpmath.mpf
    norm_sign: int

    def regulator_str(self, digits=20):
        return mpmath.nstr(self.regulator, digits)


def _floor_quadratic(p, q, d):
    """floor((p + sqrt(d)) / q) for q != 0, d not a square."""
    s = isqrt(d)
    if q > 0:
        return (p + s) // q
    return -((p + s) // -q) - 1


@lru_cache(maxsize=None)
def _fundamental_unit(d, precision_bits):
    order = QuadraticOrder(d)
    omega = order.omega
    bar = omega.conjugate()
    # continued fraction of omega = (P + sqrt(d)) / Q
    P, Q = (1, 2) if order.half_basis else (0, 1)
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    for step in range(MAX_CF_STEPS):
        a = _floor_quadratic(P, Q, d)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        candidate = order.integer(p) - bar * q
        if candidate.is_unit():
            logger.debug("d=%d: fundamental unit after %d partial quotients", d, step + 1)
            with mpmath.workprec(precision_bits + 2 * max(candidate.u.bit_length(), 8)):
                regulator = mpmath.log(candidate.sigma(prec=mpmath.mp.prec))
            return FundamentalUnitResult(candidate, regulator, candidate.norm())
        P = a * Q - P
        Q = (d - P * P) // Q
    raise UnverifiableError(f"continued fraction for d={d} did not close within {MAX_CF_STEPS} steps")


def fundamental_unit(order: QuadraticOrder, precision_bits=128) -> FundamentalUnitResult:
    """Fundamental unit eta > 1 and regulator log(eta) of a real quadratic order."""
    if not order.is_real:
        raise HypothesisFailure(f"imaginary field d={order.d}: unit rank 0")
    return _fundamental_unit(order.d, precision_bits)


def torsion_units(order: QuadraticOrder):
    """Roots of unity in the order."""
    one = order.one
    if order.d == -1:
        i = order.elt(0, 2)
        return [one, -one, i, -i]
    if order.d == -3:
        w = order.elt(1, 1)
        w2 = order.elt(-1, 1)
        return [one, -one, w, -w, w2, -w2]
    return [one, -one]


def canonical_associate(alpha: QuadraticElt) -> QuadraticElt:
    """Unique representative of the association class of alpha.

    Real fields: the associate beta with beta > 0 and
    1 <= beta / sqrt|Norm(beta)| < eta. Imaginary fields: the torsion
    multiple with lexicographically largest (u, v).
    """
    if alpha.is_zero():
        raise InvalidInputError("zero has no association class representative")
    order = alpha.order
    if not order.is_real:
        return max((alpha * w for w in torsion_units(order)), key=lambda x: (x.u, x.v))

    eta = fundamental_unit(order).unit
    eta_inv = eta.inverse()
    n = abs(alpha.norm())
    d = order.d

    def at_least_root_norm(beta):
        # sigma(beta)^2 >= n, with sigma(beta) > 0
        return sign_sqrt(beta.u * beta.u + d * beta.v * beta.v - 4 * n, 2 * beta.u * beta.v, d) >= 0

    beta = alpha if alpha.sign() > 0 else -alpha
    with mpmath.workprec(2 * max(beta.u.bit_length(), beta.v.bit_length(), 8) + 64):
        shift = (mpmath.log(beta.sigma(prec=mpmath.mp.prec)) - mpmath.log(n) / 2) / fundamental_unit(order).regulator
        beta = beta * eta ** (-int(mpmath.floor(shift)))
    while not at_least_root_norm(beta):
        beta = beta * eta
    while at_least_root_norm(beta * eta_inv):
        beta = beta * eta_inv
    return beta


def parse_element(order: QuadraticOrder, text, basis=False):
    """Element from "u,v" (doubled coordinates) or "a,b" (basis coordinates)."""
    try:
        first, second = (int(part) for part in text.split(","))
    except ValueError:
        raise InvalidInputError(f"element must be two comma-separated integers, got {text!r}")
    return order.from_basis(first, second) if basis else order.elt(first, second)
