"""
Sums of units in quadratic orders: exact-k searches, padding, sums of
distinct units and a breadth-first oracle for the least number of units.
"""
import logging
import math
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Optional, Tuple

from errors import InvalidInputError, SearchExhaustedError
from quadratic import QuadraticElt, QuadraticOrder, fundamental_unit, torsion_units

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnitSumRepr:
    """target = sum(terms), every term a unit."""

    terms: Tuple[QuadraticElt, ...]
    target: QuadraticElt
    distinct: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise InvalidInputError("a unit sum needs at least one term")
        total = self.target.order.zero
        for term in self.terms:
            if not term.is_unit():
                raise InvalidInputError(f"{term} is not a unit")
            total = total + term
        if total != self.target:
            raise InvalidInputError(f"terms sum to {total}, not {self.target}")
        if self.distinct and len(set(self.terms)) != len(self.terms):
            raise InvalidInputError("terms are not pairwise distinct")

    @property
    def k(self):
        return len(self.terms)

    def to_json(self):
        return {
            "target": str(self.target),
            "k": self.k,
            "distinct": self.distinct,
            "terms": [str(t) for t in self.terms],
        }


@dataclass(frozen=True)
class SearchOutcome:
    """Result of a bounded search; exhaustive=True makes absence a certificate."""

    representation: Optional[UnitSumRepr]
    exp_bound: Optional[int]
    exhaustive: bool

    @property
    def found(self):
        return self.representation is not None

    def to_json(self):
        payload = {"found": self.found, "exp_bound": self.exp_bound, "exhaustive": self.exhaustive}
        if self.found:
            payload.update(self.representation.to_json())
        elif self.exhaustive:
            payload["certificate"] = "no representation exists"
        else:
            payload["certificate"] = f"none with exponents |a| <= {self.exp_bound}"
        return payload


def _exponent_order(bound):
    return sorted(range(-bound, bound + 1), key=lambda a: (abs(a), a))


def unit_pool(order: QuadraticOrder, exp_bound):
    """Units +-eta^a (|a| <= exp_bound), ordered by (|a|, a, sign); the torsion for imaginary fields."""
    if not order.is_real:
        return list(torsion_units(order))
    if exp_bound < 0:
        raise InvalidInputError(f"exp_bound must be non-negative, got {exp_bound}")
    eta = fundamental_unit(order).unit
    pool = []
    for a in _exponent_order(exp_bound):
        value = eta ** a
        pool.extend((value, -value))
    return pool


def _key(x):
    return (x.u, x.v)


def _layer_sizes(order, pool, exp_bound):
    """Pool prefix lengths covering |a| <= 0, 1, ..., exp_bound (one layer for imaginary fields)."""
    if not order.is_real:
        return [len(pool)]
    return [2 + 4 * layer for layer in range(exp_bound + 1)]


def _meet_in_the_middle(alpha, k, pool):
    """First k-multiset of pool (left half, then right half, lexicographic) summing to alpha."""
    order = alpha.order
    left_size = k // 2
    right_size = k - left_size
    right = {}
    for combo in combinations_with_replacement(range(len(pool)), right_size):
        total = order.zero
        for i in combo:
            total = total + pool[i]
        right.setdefault(_key(total), combo)

    for combo in combinations_with_replacement(range(len(pool)), left_size):
        total = order.zero
        for i in combo:
            total = total + pool[i]
        match = right.get(_key(alpha - total))
        if match is not None:
            return [pool[i] for i in combo + match]
    return None


def find_k_units(alpha: QuadraticElt, k, exp_bound=12) -> SearchOutcome:
    """alpha as a sum of exactly k units, by meet in the middle.

    Real fields are searched in layers |a| <= 0, 1, ..., exp_bound, each
    layer over its own pool prefix, so the witness does not depend on
    exp_bound once it is found.
    """
    if k <= 0:
        raise InvalidInputError(f"k must be positive, got {k}")
    order = alpha.order
    pool = unit_pool(order, exp_bound)
    exhaustive = not order.is_real
    bound = exp_bound if order.is_real else None

    if k == 1:
        rep = UnitSumRepr((alpha,), alpha) if alpha.is_unit() else None
        return SearchOutcome(rep, bound, exhaustive)

    for size in _layer_sizes(order, pool, exp_bound):
        terms = _meet_in_the_middle(alpha, k, pool[:size])
        if terms is not None:
            logger.debug("find_k_units: %s found with %d pool units", alpha, size)
            return SearchOutcome(UnitSumRepr(terms, alpha), bound, exhaustive)
    return SearchOutcome(None, bound, exhaustive)


def _one_splittings(order, exp_bound):
    """Unit pairs (x, y) with x + y = 1."""
    one = order.one
    return [(x, one - x) for x in unit_pool(order, exp_bound) if (one - x).is_unit()]


def pad_representation(rep: UnitSumRepr, l, exp_bound=12) -> UnitSumRepr:
    """A representation of rep.target with exactly l > k terms.

    Tries, in order: a k-sum for target - (l-k) followed by (l-k) ones,
    splitting terms through a solution of x + y = 1, appending (1, -1)
    pairs when l - k is even, and finally a direct search for l units.
    """
    k = rep.k
    if l <= k:
        raise InvalidInputError(f"l={l} must exceed k={k}")
    alpha = rep.target
    order = alpha.order
    one = order.one
    extra = l - k

    shifted = find_k_units(alpha - extra, k, exp_bound)
    if shifted.found:
        return UnitSumRepr(shifted.representation.terms + (one,) * extra, alpha)

    splittings = _one_splittings(order, exp_bound)
    if splittings:
        x, y = splittings[0]
        terms = list(rep.terms)
        for i in range(extra):
            u = terms.pop(0)
            terms.extend((u * x, u * y))
        return UnitSumRepr(terms, alpha)

    if extra % 2 == 0:
        return UnitSumRepr(rep.terms + (one, -one) * (extra // 2), alpha)

    direct = find_k_units(alpha, l, exp_bound)
    if direct.found:
        return direct.representation
    raise SearchExhaustedError(f"no {l}-term representation of {alpha} with exponents |a| <= {exp_bound}")


def _distinct_digits(alpha, eta, B, max_terms):
    """Digits c_j in {-1, 0, 1} with eta^B * alpha = sum c_j eta^j, j = 0..2B.

    Fewest nonzero digits wins. States are pruned on both embeddings:
    the remaining tail sum_t c eta^t is bounded by sum eta^t and its
    conjugate by eta / (eta - 1).
    """
    d = alpha.d
    root = math.sqrt(d)
    eta_f = float(eta.sigma())
    eta_inv = eta.inverse()
    conj_bound = eta_f / (eta_f - 1) + 1e-9

    def embeddings(x):
        return (x.u + x.v * root) / 2, (x.u - x.v * root) / 2

    levels = 2 * B + 1
    start = alpha * eta ** B
    states = {_key(start): (start, 0, ())}
    for j in range(levels):
        remaining = levels - j - 1
        tail_bound = (eta_f ** remaining - 1) / (eta_f - 1) + 1e-9
        nxt = {}
        for beta, count, digits in states.values():
            for c in (0, 1, -1):
                cost = count + (c != 0)
                if cost > max_terms:
                    continue
                after = (beta - c) * eta_inv
                s1, s2 = embeddings(after)
                # after = sum_{t=0}^{remaining-1} c eta^t
                if abs(s1) > tail_bound or abs(s2) > conj_bound:
                    continue
                key = _key(after)
                if key not in nxt or cost < nxt[key][1]:
                    nxt[key] = (after, cost, digits + (c,))
        states = nxt
        if not states:
            return None
    final = states.get((0, 0))
    return None if final is None else final[2]


def find_distinct_units(alpha: QuadraticElt, exp_bound=12, max_terms=24) -> SearchOutcome:
    """alpha as a sum of pairwise distinct units."""
    if max_terms <= 0:
        raise InvalidInputError(f"max_terms must be positive, got {max_terms}")
    order = alpha.order
    one = order.one
    if alpha.is_zero():
        if max_terms < 2:
            return SearchOutcome(None, exp_bound if order.is_real else None, not order.is_real)
        return SearchOutcome(UnitSumRepr((one, -one), alpha, distinct=True),
                             exp_bound if order.is_real else None, not order.is_real)

    if not order.is_real:
        units = torsion_units(order)
        for size in range(1, min(max_terms, len(units)) + 1):
            for subset in combinations(units, size):
                total = order.zero
                for u in subset:
                    total = total + u
                if total == alpha:
                    return SearchOutcome(UnitSumRepr(subset, alpha, distinct=True), None, True)
        return SearchOutcome(None, None, True)

    eta = fundamental_unit(order).unit
    eta_f = float(eta.sigma())
    s1 = abs(float(alpha.sigma()))
    s2 = abs(float(alpha.sigma(conjugate=True)))
    size = max(s1, s2, 1.0)
    start = max(1, int(math.log(size) / math.log(eta_f)) - 1)
    for B in range(start, exp_bound + 1):
        digits = _distinct_digits(alpha, eta, B, max_terms)
        if digits is None:
            continue
        logger.debug("find_distinct_units: %s found at B=%d", alpha, B)
        terms = []
        for j, c in enumerate(digits):
            if c:
                power = eta ** (j - B)
                terms.append(power if c > 0 else -power)
        return SearchOutcome(UnitSumRepr(terms, alpha, distinct=True), exp_bound, False)
    return SearchOutcome(None, exp_bound, False)


def unit_sum_lengths(order: QuadraticOrder, height, max_terms=20, exp_bound=12, partial_height=None):
    """Least t <= max_terms with alpha a sum of exactly t units, for every alpha of height <= height.

    Breadth-first over partial sums kept inside the box of height
    partial_height (default 3*height + 3). Elements never reached map to None.
    """
    if height < 0 or max_terms <= 0:
        raise InvalidInputError("height must be non-negative and max_terms positive")
    partial_height = 3 * height + 3 if partial_height is None else partial_height
    pool = [u for u in unit_pool(order, exp_bound) if u.height() <= 2 * partial_height]
    result = {_key(alpha): None for alpha in order.box(height)}

    frontier = {}
    for u in pool:
        frontier.setdefault(_key(u), u)
    for t in range(1, max_terms + 1):
        for key in frontier:
            if key in result and result[key] is None:
                result[key] = t
        if t == max_terms or all(v is not None for v in result.values()):
            break
        nxt = {}
        for s in frontier.values():
            for u in pool:
                total = s + u
                if total.height() <= partial_height:
                    nxt.setdefault(_key(total), total)
        frontier = nxt
    logger.debug("unit_sum_lengths d=%d: %d of %d elements reached", order.d,
                 sum(v is not None for v in result.values()), len(result))
    return {order.elt(*key): t for key, t in result.items()}
