"""
Rings with two-sided Euclidean division.

Three instances are provided: the rational integers, polynomials over a
prime field and the Hurwitz quaternions. The matrix reduction in
matrix_units only talks to the EuclideanRing interface.
"""
import itertools
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

from sympy import Poly, isprime, symbols

from errors import InvalidInputError, NotInvertibleError


class EuclideanRing(ABC):
    """Ring R with a size function f and left/right division with remainder.

    left_divide(a, b)  -> (q, r) with a = q*b + r and (r = 0 or f(r) < f(b))
    right_divide(a, b) -> (q, r) with a = b*q + r and (r = 0 or f(r) < f(b))
    """

    name = "ring"

    @abstractmethod
    def zero(self): ...

    @abstractmethod
    def one(self): ...

    @abstractmethod
    def add(self, a, b): ...

    @abstractmethod
    def neg(self, a): ...

    @abstractmethod
    def mul(self, a, b): ...

    @abstractmethod
    def size(self, a) -> int: ...

    @abstractmethod
    def left_divide(self, a, b): ...

    @abstractmethod
    def right_divide(self, a, b): ...

    @abstractmethod
    def unit_inverse(self, a):
        """Return w with a*w = w*a = 1, or None when a is not a unit."""

    @abstractmethod
    def encode(self, a): ...

    @abstractmethod
    def decode(self, obj): ...

    @abstractmethod
    def random_element(self, rng, bound): ...

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def is_zero(self, a) -> bool:
        return self.eq(a, self.zero())

    def eq(self, a, b) -> bool:
        return a == b

    def is_unit(self, a) -> bool:
        return self.unit_inverse(a) is not None

    @property
    def one_is_minus_one(self) -> bool:
        return self.eq(self.one(), self.neg(self.one()))

    def _check_divisor(self, b):
        if self.is_zero(b):
            raise InvalidInputError(f"division by zero in {self.name}")


class IntegerRing(EuclideanRing):
    """The integers with the symmetric (least absolute value) remainder."""

    name = "z"

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def size(self, a):
        return abs(a)

    def left_divide(self, a, b):
        self._check_divisor(b)
        q, r = divmod(a, b)
        if 2 * abs(r) > abs(b):
            r -= b
            q += 1
        return q, r

    def right_divide(self, a, b):
        return self.left_divide(a, b)

    def unit_inverse(self, a):
        return a if a in (1, -1) else None

    def encode(self, a):
        return int(a)

    def decode(self, obj):
        try:
            return int(obj)
        except (TypeError, ValueError):
            raise InvalidInputError(f"not an integer: {obj!r}")

    def random_element(self, rng, bound):
        return rng.randint(-bound, bound)


X = symbols("X")


class PolynomialRing(EuclideanRing):
    """GF(p)[X]; f is the degree."""

    def __init__(self, p=2):
        if not isprime(p):
            raise InvalidInputError(f"modulus must be prime, got {p}")
        self.p = p
        self.name = f"fp[x]/p={p}"

    def poly(self, coeffs):
        """Polynomial from coefficients listed lowest degree first."""
        return Poly(list(reversed([int(c) % self.p for c in coeffs])) or [0], X, modulus=self.p)

    def zero(self):
        return self.poly([0])

    def one(self):
        return self.poly([1])

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def size(self, a):
        return int(a.degree()) if not a.is_zero else 0

    def is_zero(self, a):
        return a.is_zero

    def left_divide(self, a, b):
        self._check_divisor(b)
        return a.div(b)

    def right_divide(self, a, b):
        return self.left_divide(a, b)

    def unit_inverse(self, a):
        if a.is_zero or a.degree() != 0:
            return None
        c = int(a.LC()) % self.p
        return self.poly([pow(c, -1, self.p)])

    def encode(self, a):
        coeffs = [int(c) % self.p for c in reversed(a.all_coeffs())]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return coeffs

    def decode(self, obj):
        if isinstance(obj, int):
            obj = [obj]
        if not isinstance(obj, (list, tuple)):
            raise InvalidInputError(f"polynomial must be a coefficient list, got {obj!r}")
        return self.poly(obj)

    def random_element(self, rng, bound):
        return self.poly([rng.randrange(self.p) for _ in range(bound + 1)])


@dataclass(frozen=True)
class HurwitzQuat:
    """(e0 + e1 i + e2 j + e3 k) / 2 with e0 = e1 = e2 = e3 (mod 2)."""

    e0: int
    e1: int
    e2: int
    e3: int

    def __post_init__(self):
        parity = self.e0 % 2
        if not (self.e1 % 2 == parity and self.e2 % 2 == parity and self.e3 % 2 == parity):
            raise InvalidInputError(
                f"coordinates must share parity: {self.e0}, {self.e1}, {self.e2}, {self.e3}")

    @classmethod
    def from_ints(cls, a, b=0, c=0, d=0):
        """Lipschitz point a + bi + cj + dk."""
        return cls(2 * a, 2 * b, 2 * c, 2 * d)

    @property
    def coords(self) -> Tuple[int, int, int, int]:
        return (self.e0, self.e1, self.e2, self.e3)

    def __add__(self, other):
        return HurwitzQuat(self.e0 + other.e0, self.e1 + other.e1,
                           self.e2 + other.e2, self.e3 + other.e3)

    def __sub__(self, other):
        return HurwitzQuat(self.e0 - other.e0, self.e1 - other.e1,
                           self.e2 - other.e2, self.e3 - other.e3)

    def __neg__(self):
        return HurwitzQuat(-self.e0, -self.e1, -self.e2, -self.e3)

    def __mul__(self, other):
        # product of doubled coordinates is 4x the value; halve once
        a1, b1, c1, d1 = self.coords
        a2, b2, c2, d2 = other.coords
        return HurwitzQuat(
            (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2) // 2,
            (a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2) // 2,
            (a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2) // 2,
            (a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2) // 2,
        )

    def conjugate(self):
        return HurwitzQuat(self.e0, -self.e1, -self.e2, -self.e3)

    def norm(self) -> int:
        return (self.e0 ** 2 + self.e1 ** 2 + self.e2 ** 2 + self.e3 ** 2) // 4

    def is_zero(self) -> bool:
        return self.coords == (0, 0, 0, 0)

    def is_unit(self) -> bool:
        return self.norm() == 1

    def inverse(self):
        if not self.is_unit():
            raise NotInvertibleError(f"{self} is not a unit")
        return self.conjugate()

    def __str__(self):
        def coeff(e):
            return str(e // 2) if e % 2 == 0 else f"{e}/2"

        parts = []
        for e, label in zip(self.coords, ("", "i", "j", "k")):
            if e == 0:
                continue
            text = coeff(abs(e))
            if label and text == "1":
                text = ""
            sign = "-" if e < 0 else ("+" if parts else "")
            parts.append(f"{sign}{text}{label}")
        return "".join(parts) or "0"

    @classmethod
    def parse(cls, text):
        """Inverse of str(): accepts "2+3i", "1/2+1/2i-1/2j+1/2k", "-k"."""
        cleaned = text.replace(" ", "")
        if not cleaned:
            raise InvalidInputError("empty quaternion")
        doubled = {"": 0, "i": 0, "j": 0, "k": 0}
        for token in re.findall(r"[+-]?[^+-]+", cleaned):
            match = re.fullmatch(r"([+-]?)(\d*)(/2)?([ijk]?)", token)
            if not match or (not match.group(2) and not match.group(4)):
                raise InvalidInputError(f"cannot parse quaternion term {token!r} in {text!r}")
            sign, digits, half, label = match.groups()
            value = int(digits) if digits else 1
            value = value if half else 2 * value
            doubled[label] += -value if sign == "-" else value
        return cls(doubled[""], doubled["i"], doubled["j"], doubled["k"])


ONE = HurwitzQuat(2, 0, 0, 0)
ZERO = HurwitzQuat(0, 0, 0, 0)


def hurwitz_units():
    """The 24 units: +-1, +-i, +-j, +-k and (+-1 +-i +-j +-k)/2."""
    units = []
    for axis in range(4):
        for sign in (2, -2):
            coords = [0, 0, 0, 0]
            coords[axis] = sign
            units.append(HurwitzQuat(*coords))
    for signs in itertools.product((1, -1), repeat=4):
        units.append(HurwitzQuat(*signs))
    return units


def _round_quotient(t: HurwitzQuat, n: int):
    """Candidate Hurwitz points nearest to t/n (t in doubled coordinates)."""
    # value coordinate z = e / (2n)
    lipschitz = HurwitzQuat(*(2 * ((e + n) // (2 * n)) for e in t.coords))
    half = HurwitzQuat(*(2 * (e // (2 * n)) + 1 for e in t.coords))
    return lipschitz, half


def _divide(a: HurwitzQuat, b: HurwitzQuat, left: bool):
    if b.is_zero():
        raise InvalidInputError("division by zero in hurwitz")
    n = b.norm()
    t = a * b.conjugate() if left else b.conjugate() * a
    best = None
    for q in _round_quotient(t, n):
        r = a - q * b if left else a - b * q
        if best is None or r.norm() < best[1].norm():
            best = (q, r)
        if best[1].norm() < n:
            break
    return best


def hurwitz_left_divide(a: HurwitzQuat, b: HurwitzQuat):
    """(q, r) with a = q*b + r and N(r) < N(b)."""
    return _divide(a, b, left=True)


def hurwitz_right_divide(a: HurwitzQuat, b: HurwitzQuat):
    """(q, r) with a = b*q + r and N(r) < N(b)."""
    return _divide(a, b, left=False)


class HurwitzRing(EuclideanRing):
    name = "hurwitz"

    def zero(self):
        return ZERO

    def one(self):
        return ONE

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def size(self, a):
        return a.norm()

    def left_divide(self, a, b):
        return hurwitz_left_divide(a, b)

    def right_divide(self, a, b):
        return hurwitz_right_divide(a, b)

    def unit_inverse(self, a):
        return a.conjugate() if a.is_unit() else None

    def encode(self, a):
        return str(a)

    def decode(self, obj):
        if isinstance(obj, int):
            return HurwitzQuat.from_ints(obj)
        if not isinstance(obj, str):
            raise InvalidInputError(f"quaternion must be a string, got {obj!r}")
        return HurwitzQuat.parse(obj)

    def random_element(self, rng, bound):
        """Uniform over Hurwitz points of norm <= bound."""
        limit = 2 * int(bound ** 0.5) + 1
        while True:
            parity = rng.randrange(2)
            coords = [2 * rng.randint(-limit // 2, limit // 2) + parity for _ in range(4)]
            q = HurwitzQuat(*coords)
            if q.norm() <= bound:
                return q


def get_ring(name, p=2) -> EuclideanRing:
    """Ring instance by CLI name: z, fp[x] or hurwitz."""
    key = name.lower()
    if key in ("z", "int", "integers"):
        return IntegerRing()
    if key in ("fp[x]", "poly", "gf(p)[x]"):
        return PolynomialRing(p)
    if key in ("hurwitz", "h"):
        return HurwitzRing()
    raise InvalidInputError(f"unknown ring {name!r}; expected z, fp[x] or hurwitz")
