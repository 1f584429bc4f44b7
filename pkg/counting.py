"""
Counting sums of units in a real quadratic field.

u(n, x) counts association classes [alpha] with |Norm(alpha)| <= x where
alpha = e_1 + ... + e_n is a sum of units with no vanishing subsum. The
asymptotic main term is (c_{n-1,1} / n!) (omega_K log x / Reg)^{n-1}.
N_k(x) counts the positive rational integers <= x that are sums of at
most k units.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Tuple

import mpmath

from errors import InvalidInputError, StabilityError
from polytope import closed_form
from quadratic import QuadraticElt, QuadraticOrder, canonical_associate, fundamental_unit, torsion_units

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CountingContext:
    order: QuadraticOrder
    omega_k: int
    regulator: mpmath.mpf
    eta: QuadraticElt
    s: int = 1

    @classmethod
    def for_field(cls, d, precision_bits=128):
        order = QuadraticOrder(d)
        if not order.is_real:
            raise InvalidInputError(f"counting needs a real quadratic field, got d={d}")
        fu = fundamental_unit(order, precision_bits)
        return cls(order, len(torsion_units(order)), fu.regulator, fu.unit)

    @property
    def d(self):
        return self.order.d


@dataclass(frozen=True)
class ClassCount:
    d: int
    n: int
    x: float
    count: int
    classes: Tuple[QuadraticElt, ...]
    exp_bound: int

    def to_json(self, with_classes=False):
        payload = {"d": self.d, "n": self.n, "x": self.x,
                   "count": self.count, "exp_bound": self.exp_bound}
        if with_classes:
            payload["classes"] = [{"alpha": str(c), "norm": abs(c.norm())} for c in self.classes]
        return payload


def _check_positive(**values):
    for name, value in values.items():
        if value is None or value < 1:
            raise InvalidInputError(f"{name} must be at least 1, got {value}")


def exponent_bound(ctx: CountingContext, n, x):
    """B(x) = ceil(log x / (2 Reg)) + n + 3."""
    return int(mpmath.ceil(mpmath.log(x) / (2 * ctx.regulator))) + n + 3


def _unit_tuples(ctx, bound):
    """(u, v) of +-eta^a for |a| <= bound."""
    eta = ctx.eta
    units = []
    for a in sorted(range(-bound, bound + 1), key=lambda a: (abs(a), a)):
        value = eta ** a
        units.append((value.u, value.v))
        units.append((-value.u, -value.v))
    return units


def _has_vanishing_proper_subsum(terms):
    size = len(terms)
    for r in range(1, size):
        for subset in combinations(terms, r):
            if sum(t[0] for t in subset) == 0 and sum(t[1] for t in subset) == 0:
                return True
    return False


def _classes_for_bound(ctx, n, x, bound, count_zero_class, threads):
    d = ctx.d
    one = (2, 0)
    pool = _unit_tuples(ctx, 2 * bound)

    def scan(first):
        found = {}
        zero_seen = False
        # remaining n - 1 terms as a multiset starting at pool index `first`
        rest_size = n - 1
        if rest_size == 0:
            candidates = [()]
        else:
            candidates = ((first,) + tail for tail in
                          combinations_with_replacement(range(first, len(pool)), rest_size - 1))
        for combo in candidates:
            terms = [one] + [pool[i] for i in combo]
            u = sum(t[0] for t in terms)
            v = sum(t[1] for t in terms)
            if abs(u * u - d * v * v) > 4 * x:
                continue
            if _has_vanishing_proper_subsum(terms):
                continue
            if u == 0 and v == 0:
                zero_seen = True
                continue
            alpha = ctx.order.elt(u, v)
            rep = canonical_associate(alpha)
            found[(rep.u, rep.v)] = rep
        return found, zero_seen

    starts = [0] if n == 1 else list(range(len(pool)))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(scan, starts))
    else:
        parts = [scan(i) for i in starts]

    classes = {}
    zero_seen = False
    for found, zero in parts:
        classes.update(found)
        zero_seen = zero_seen or zero
    count = len(classes) + (1 if count_zero_class and zero_seen else 0)
    ordered = tuple(sorted(classes.values(), key=lambda c: (abs(c.norm()), c.u, c.v)))
    return count, ordered


def count_unit_sum_classes(ctx: CountingContext, n, x, exp_bound=None, count_zero_class=False,
                           check_stability=True, threads=1) -> ClassCount:
    """Exact u(n, x), enumerated with e_1 = 1 and other exponents |a| <= 2B.

    The run is repeated at B + 2 and must give the same count.
    """
    _check_positive(n=n, x=x)
    bound = exp_bound if exp_bound is not None else exponent_bound(ctx, n, x)
    count, classes = _classes_for_bound(ctx, n, x, bound, count_zero_class, threads)
    if check_stability:
        wider, _ = _classes_for_bound(ctx, n, x, bound + 2, count_zero_class, threads)
        if wider != count:
            raise StabilityError(f"u({n}, {x}) changed from {count} to {wider} when B grew from {bound} to {bound + 2}")
    logger.debug("u(%d, %s) = %d for d=%d at B=%d", n, x, count, ctx.d, bound)
    return ClassCount(ctx.d, n, x, count, classes, bound)


def asymptotic_main_term(ctx: CountingContext, n, x):
    """(c_{n-1,1} / n!) (omega_K log x / Reg)^{n-1}."""
    if n < 2:
        raise InvalidInputError(f"the main term needs n >= 2, got n={n}")
    _check_positive(x=x)
    c = closed_form(n - 1, ctx.s)
    base = ctx.omega_k * mpmath.log(x) ** ctx.s / ctx.regulator
    return mpmath.mpf(c.numerator) / c.denominator / math.factorial(n) * base ** (n - 1)


def _rational_values(ctx, k, x, bound):
    pool = _unit_tuples(ctx, bound)
    values = set()
    for size in range(1, k + 1):
        for combo in combinations_with_replacement(pool, size):
            if sum(t[1] for t in combo):
                continue
            u = sum(t[0] for t in combo)
            if u > 0 and u <= 2 * x:
                values.add(u // 2)
    return values


def count_rational_k_sums(ctx: CountingContext, k, x, exp_bound=None, check_stability=True):
    """N_k(x): positive integers m <= x that are sums of at most k units."""
    _check_positive(k=k, x=x)
    bound = exp_bound if exp_bound is not None else int(mpmath.ceil(mpmath.log(x) / ctx.regulator)) + k + 3
    values = _rational_values(ctx, k, x, bound)
    if check_stability:
        wider = _rational_values(ctx, k, x, bound + 2)
        if len(wider) != len(values):
            raise StabilityError(f"N_{k}({x}) changed from {len(values)} to {len(wider)} when B grew to {bound + 2}")
    return len(values)


def rational_k_sums(ctx: CountingContext, k, x, exp_bound=None):
    """The integers counted by count_rational_k_sums, sorted."""
    _check_positive(k=k, x=x)
    bound = exp_bound if exp_bound is not None else int(mpmath.ceil(mpmath.log(x) / ctx.regulator)) + k + 3
    return sorted(_rational_values(ctx, k, x, bound))


def compare_rows(ctx: CountingContext, n, xs, threads=1):
    """(x, empirical, main term, ratio) rows."""
    rows = []
    for x in xs:
        result = count_unit_sum_classes(ctx, n, x, threads=threads)
        main = asymptotic_main_term(ctx, n, x)
        ratio = result.count / main if main > 0 else None
        rows.append({
            "d": ctx.d,
            "n": n,
            "x": x,
            "empirical": result.count,
            "main_term": mpmath.nstr(main, 10),
            "ratio": mpmath.nstr(ratio, 6) if ratio is not None else None,
            "exp_bound": result.exp_bound,
        })
    return rows
