"""
Matrices over rings with two-sided Euclidean division written as sums of
two invertible matrices.

Every summand is produced as a word in the generators of E_n(R)
(elementary matrices, permutation matrices and -I), so its inverse is the
reversed word of inverted generators. Witness matrices over imaginary
quadratic orders come with a bounded search for two-unit decompositions.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple, Union

from sympy import primerange

from errors import HypothesisFailure, InvalidInputError, NotInvertibleError
from quadratic import QuadraticOrder, torsion_units
from ring_core import EuclideanRing

logger = logging.getLogger(__name__)

# d > 0 with Q(sqrt(-d)) of class number one
CLASS_NUMBER_ONE = (1, 2, 3, 7, 11, 19, 43, 67, 163)


@dataclass(frozen=True)
class Elem:
    """Identity plus a at position (i, j), 1-based, i != j."""

    a: object
    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise InvalidInputError(f"elementary matrix needs i != j, got ({self.i}, {self.j})")

    def inverse(self, ring):
        return Elem(ring.neg(self.a), self.i, self.j)


@dataclass(frozen=True)
class Perm:
    """Permutation matrix with P[sigma(j)][j] = 1; images are 1-based."""

    images: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise InvalidInputError(f"{self.images} is not a permutation of 1..{len(self.images)}")

    def inverse(self, ring):
        inv = [0] * len(self.images)
        for j, image in enumerate(self.images, 1):
            inv[image - 1] = j
        return Perm(tuple(inv))


@dataclass(frozen=True)
class NegId:
    def inverse(self, ring):
        return self


@dataclass(frozen=True)
class EnWord:
    """Product g_1 g_2 ... g_k of generators, evaluated left to right."""

    gens: Tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))

    def __add__(self, other):
        return EnWord(self.gens + other.gens)

    def __len__(self):
        return len(self.gens)

    def inverse(self, ring):
        return EnWord(tuple(g.inverse(ring) for g in reversed(self.gens)))

    def to_json(self, ring):
        out = []
        for g in self.gens:
            if isinstance(g, Elem):
                out.append({"elem": [ring.encode(g.a), g.i, g.j]})
            elif isinstance(g, Perm):
                out.append({"perm": list(g.images)})
            else:
                out.append({"neg": True})
        return out

    @classmethod
    def from_json(cls, data, ring):
        gens = []
        for item in data:
            if "elem" in item:
                a, i, j = item["elem"]
                gens.append(Elem(ring.decode(a), int(i), int(j)))
            elif "perm" in item:
                gens.append(Perm(tuple(int(x) for x in item["perm"])))
            elif item.get("neg"):
                gens.append(NegId())
            else:
                raise InvalidInputError(f"malformed generator {item!r}")
        return cls(tuple(gens))


class RingMatrix:
    """Dense square or rectangular matrix with entries in a EuclideanRing."""

    def __init__(self, ring: EuclideanRing, rows):
        self.ring = ring
        self.rows = [list(r) for r in rows]
        if not self.rows or any(len(r) != len(self.rows[0]) for r in self.rows):
            raise InvalidInputError("matrix rows must be non-empty and of equal length")

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal_matrix(cls, ring, entries):
        n = len(entries)
        return cls(ring, [[entries[i] if i == j else ring.zero() for j in range(n)] for i in range(n)])

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    @property
    def n(self):
        rows, cols = self.shape
        if rows != cols:
            raise InvalidInputError(f"matrix is {rows}x{cols}, not square")
        return rows

    def copy(self):
        return RingMatrix(self.ring, self.rows)

    def __getitem__(self, index):
        i, j = index
        return self.rows[i][j]

    def __add__(self, other):
        r = self.ring
        return RingMatrix(r, [[r.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other):
        r = self.ring
        return RingMatrix(r, [[r.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self):
        r = self.ring
        return RingMatrix(r, [[r.neg(a) for a in row] for row in self.rows])

    def __mul__(self, other):
        r = self.ring
        rows, inner = self.shape
        if other.shape[0] != inner:
            raise InvalidInputError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.shape[1]
        out = []
        for i in range(rows):
            row = []
            for j in range(cols):
                acc = r.zero()
                for k in range(inner):
                    acc = r.add(acc, r.mul(self.rows[i][k], other.rows[k][j]))
                row.append(acc)
            out.append(row)
        return RingMatrix(r, out)

    def __eq__(self, other):
        if not isinstance(other, RingMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return all(self.ring.eq(a, b) for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb))

    def is_diagonal(self):
        return all(self.ring.is_zero(self.rows[i][j])
                   for i in range(len(self.rows)) for j in range(len(self.rows[0])) if i != j)

    def diagonal(self):
        return [self.rows[i][i] for i in range(min(self.shape))]

    def is_identity(self):
        return self == RingMatrix.identity(self.ring, self.n)

    # in-place elementary operations; noncommutative products keep the side shown

    def add_row_multiple(self, target, source, a):
        """row_target += a * row_source."""
        r = self.ring
        self.rows[target] = [r.add(x, r.mul(a, y)) for x, y in zip(self.rows[target], self.rows[source])]

    def add_col_multiple(self, target, source, a):
        """col_target += col_source * a."""
        r = self.ring
        for row in self.rows:
            row[target] = r.add(row[target], r.mul(row[source], a))

    def swap_rows(self, i, j):
        self.rows[i], self.rows[j] = self.rows[j], self.rows[i]

    def swap_cols(self, i, j):
        for row in self.rows:
            row[i], row[j] = row[j], row[i]

    def encode(self):
        return [[self.ring.encode(a) for a in row] for row in self.rows]

    @classmethod
    def decode(cls, ring, data):
        if not isinstance(data, list) or not data:
            raise InvalidInputError("matrix must be a non-empty list of rows")
        return cls(ring, [[ring.decode(a) for a in row] for row in data])

    def __repr__(self):
        return f"RingMatrix({self.ring.name}, {self.encode()})"


def _apply_right(M: RingMatrix, g, n):
    """M <- M g in place, as a column operation."""
    ring = M.ring
    if isinstance(g, Elem):
        if not (1 <= g.i <= n and 1 <= g.j <= n):
            raise InvalidInputError(f"generator index ({g.i}, {g.j}) outside 1..{n}")
        M.add_col_multiple(g.j - 1, g.i - 1, g.a)
    elif isinstance(g, Perm):
        if len(g.images) != n:
            raise InvalidInputError(f"permutation of size {len(g.images)} in dimension {n}")
        # (M P)[:, j] = M[:, sigma(j)]
        M.rows = [[row[image - 1] for image in g.images] for row in M.rows]
    elif isinstance(g, NegId):
        M.rows = [[ring.neg(a) for a in row] for row in M.rows]
    else:
        raise InvalidInputError(f"malformed generator {g!r}")


def en_eval(word: EnWord, n, ring: EuclideanRing) -> RingMatrix:
    """Matrix of a word; the empty word is the identity."""
    result = RingMatrix.identity(ring, n)
    for g in word.gens:
        _apply_right(result, g, n)
    return result


def _transposition(n, i, j):
    images = list(range(1, n + 1))
    images[i], images[j] = images[j], images[i]
    return Perm(tuple(images))


def _rotation(k, sign, ring):
    """Block [[0, s], [-s, 0]] on rows/columns k, k+1."""
    s = ring.one() if sign > 0 else ring.neg(ring.one())
    return [Elem(s, k, k + 1), Elem(ring.neg(s), k + 1, k), Elem(s, k, k + 1)]


def _cycle(n, sign, ring):
    """C with C e_{j+1} = sign * e_j, built as R_{n-1} ... R_1."""
    gens = []
    for k in range(n - 1, 0, -1):
        gens.extend(_rotation(k, sign, ring))
    return gens


@dataclass(frozen=True)
class Summand:
    """An invertible matrix with its verified inverse; word set when it lies in E_n by construction."""

    matrix: RingMatrix = field(compare=False)
    inverse: RingMatrix = field(compare=False)
    word: Optional[EnWord] = None

    @classmethod
    def from_word(cls, word, n, ring):
        return cls(en_eval(word, n, ring), en_eval(word.inverse(ring), n, ring), word)

    def verify(self):
        if not ((self.matrix * self.inverse).is_identity() and (self.inverse * self.matrix).is_identity()):
            return False
        if self.word is not None:
            return en_eval(self.word, self.matrix.n, self.matrix.ring) == self.matrix
        return True


@dataclass(frozen=True)
class TwoUnitDecomp:
    target: RingMatrix = field(compare=False)
    first: Summand
    second: Summand

    def verify(self):
        return self._verified

    @cached_property
    def _verified(self):
        return (self.first.matrix + self.second.matrix == self.target
                and self.first.verify() and self.second.verify())

    def to_json(self):
        ring = self.target.ring
        payload = {"ring": ring.name, "target": self.target.encode(), "verified": self.verify()}
        for key, summand in (("first", self.first), ("second", self.second)):
            part = {"matrix": summand.matrix.encode(), "inverse": summand.inverse.encode()}
            if summand.word is not None:
                part["word"] = summand.word.to_json(ring)
            payload[key] = part
        return payload


def _check_diagonal(D):
    n = D.n
    if n < 2:
        raise InvalidInputError("a diagonal split needs n >= 2")
    if not D.is_diagonal():
        raise InvalidInputError("matrix is not diagonal")
    return n


def _split_words(diag, ring, sign):
    """diag(d) = C E(sign d_1, 2, 1) + E(-sign d_2, 2, 1) ... E(-sign d_n, n, n-1) (-C)."""
    n = len(diag)
    cycle = _cycle(n, sign, ring)
    first = EnWord(tuple(cycle) + (Elem(diag[0] if sign > 0 else ring.neg(diag[0]), 2, 1),))
    lower = []
    for i in range(2, n + 1):
        d = diag[i - 1]
        lower.append(Elem(ring.neg(d) if sign > 0 else d, i, i - 1))
    second = EnWord(tuple(lower) + (NegId(),) + tuple(cycle))
    return first, second


def diagonal_split(D: RingMatrix) -> TwoUnitDecomp:
    """D = P + Q with P, Q in E_n; for n = 2, [[a,1],[-1,0]] + [[0,-1],[1,b]]."""
    n = _check_diagonal(D)
    ring = D.ring
    first, second = _split_words(D.diagonal(), ring, 1)
    return TwoUnitDecomp(D, Summand.from_word(first, n, ring), Summand.from_word(second, n, ring))


def distinct_split(D: RingMatrix):
    """Two different splits of D, the second the sign mirror of the first."""
    n = _check_diagonal(D)
    ring = D.ring
    if ring.one_is_minus_one:
        raise HypothesisFailure(f"1 = -1 in {ring.name}: distinct splits need 1 != -1")
    plain = diagonal_split(D)
    first, second = _split_words(D.diagonal(), ring, -1)
    mirrored = TwoUnitDecomp(D, Summand.from_word(first, n, ring), Summand.from_word(second, n, ring))
    return plain, mirrored


def diagonalize(A: RingMatrix):
    """(U, V, D) with eval(U) A eval(V) = D diagonal, U and V words in E_n.

    The pivot is a nonzero entry of minimal size in the trailing block.
    Row reduction uses left division (quotient on the left), column
    reduction right division. Row operations prepend to U, column
    operations append to V.
    """
    n = A.n
    ring = A.ring
    B = A.copy()
    left = []
    right = []
    for t in range(n):
        while True:
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    x = B.rows[i][j]
                    if ring.is_zero(x):
                        continue
                    if best is None or ring.size(x) < best[0]:
                        best = (ring.size(x), i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                B.swap_rows(t, pi)
                left.insert(0, _transposition(n, t, pi))
            if pj != t:
                B.swap_cols(t, pj)
                right.append(_transposition(n, t, pj))
            pivot = B.rows[t][t]
            clean = True
            for i in range(t + 1, n):
                if ring.is_zero(B.rows[i][t]):
                    continue
                q, r = ring.left_divide(B.rows[i][t], pivot)
                neg_q = ring.neg(q)
                B.add_row_multiple(i, t, neg_q)
                left.insert(0, Elem(neg_q, i + 1, t + 1))
                clean = clean and ring.is_zero(r)
            for j in range(t + 1, n):
                if ring.is_zero(B.rows[t][j]):
                    continue
                q, r = ring.right_divide(B.rows[t][j], pivot)
                neg_q = ring.neg(q)
                B.add_col_multiple(j, t, neg_q)
                right.append(Elem(neg_q, t + 1, j + 1))
                clean = clean and ring.is_zero(r)
            logger.debug("diagonalize t=%d pivot size %d clean=%s", t, ring.size(pivot), clean)
            if clean:
                break
    return EnWord(tuple(left)), EnWord(tuple(right)), B


def two_units_decompose(A: RingMatrix) -> TwoUnitDecomp:
    """A = U^-1 P V^-1 + U^-1 Q V^-1 from UAV = D and D = P + Q."""
    n = A.n
    if n < 2:
        raise InvalidInputError("two-unit decomposition needs n >= 2")
    ring = A.ring
    U, V, D = diagonalize(A)
    p_word, q_word = _split_words(D.diagonal(), ring, 1)
    u_inv = U.inverse(ring)
    v_inv = V.inverse(ring)
    first = Summand.from_word(u_inv + p_word + v_inv, n, ring)
    second = Summand.from_word(u_inv + q_word + v_inv, n, ring)
    decomp = TwoUnitDecomp(A, first, second)
    if not decomp.verify():
        raise InvalidInputError("decomposition failed verification")
    return decomp


def matrix_inverse(M: RingMatrix) -> RingMatrix:
    """Inverse via UMV = D: M^-1 = V D^-1 U."""
    ring = M.ring
    U, V, D = diagonalize(M)
    inverses = []
    for d in D.diagonal():
        w = ring.unit_inverse(d)
        if w is None:
            raise NotInvertibleError(f"matrix is not invertible over {ring.name}")
        inverses.append(w)
    n = M.n
    return en_eval(V, n, ring) * RingMatrix.diagonal_matrix(ring, inverses) * en_eval(U, n, ring)


def _as_unit(x, ring, n):
    if isinstance(x, EnWord):
        return Summand.from_word(x, n, ring)
    return Summand(x, matrix_inverse(x))


def equivalence_transfer(decomp: TwoUnitDecomp, U: Union[RingMatrix, EnWord], V: Union[RingMatrix, EnWord]):
    """Decomposition of U A V from one of A: U A V = U M1 V + U M2 V."""
    ring = decomp.target.ring
    n = decomp.target.n
    u = _as_unit(U, ring, n)
    v = _as_unit(V, ring, n)

    def move(s):
        word = None
        if s.word is not None and u.word is not None and v.word is not None:
            word = u.word + s.word + v.word
        return Summand(u.matrix * s.matrix * v.matrix, v.inverse * s.inverse * u.inverse, word)

    target = u.matrix * decomp.target * v.matrix
    return TwoUnitDecomp(target, move(decomp.first), move(decomp.second))


def random_matrix(ring: EuclideanRing, n, rng, bound=10) -> RingMatrix:
    return RingMatrix(ring, [[ring.random_element(rng, bound) for _ in range(n)] for _ in range(n)])


def random_suite(ring: EuclideanRing, n, count, rng, bound=10, threads=1):
    """Decompose `count` random n x n matrices; rows in generation order."""
    matrices = [random_matrix(ring, n, rng, bound) for _ in range(count)]

    def run(A):
        decomp = two_units_decompose(A)
        return {"matrix": A.encode(), "verified": decomp.verify(),
                "word_lengths": [len(decomp.first.word), len(decomp.second.word)]}

    if threads <= 1:
        return [run(A) for A in matrices]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(run, matrices))


# Witness matrices over imaginary quadratic orders


@dataclass(frozen=True)
class WitnessSearchReport:
    d: int
    height: int
    matrix: Tuple
    candidates_checked: int
    decompositions: Tuple = ()
    ideal: str = ""

    @property
    def found(self):
        return bool(self.decompositions)

    def to_json(self):
        payload = {
            "d": self.d,
            "height": self.height,
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "candidates_checked": self.candidates_checked,
            "decompositions_found": len(self.decompositions),
            "decompositions": [
                [[[str(x) for x in row] for row in m] for m in pair] for pair in self.decompositions
            ],
        }
        if self.ideal:
            payload["ideal"] = self.ideal
        return payload


def _det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _sub2(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def search_two_unit_decompositions(A, order: QuadraticOrder, height, limit=1) -> WitnessSearchReport:
    """All A = M1 + M2 with det M1, det M2 units and entries of M1 of height <= height.

    Writing M1 = [[p, q], [r, s]], det(A - M1) = det A + det M1 - (a11 s + a22 p - a12 r - a21 q).
    When the second column of A vanishes this pins a11 s - a21 q to a
    difference of units, which is checked first by dictionary lookup.
    """
    A = tuple(tuple(row) for row in A)
    (a11, a12), (a21, a22) = A
    units = torsion_units(order)
    unit_keys = {(u.u, u.v) for u in units}
    box = order.box(height)
    found = []
    checked = 0
    fast = a12.is_zero() and a22.is_zero()
    allowed = {((du - dv).u, (du - dv).v) for du in units for dv in units}
    a11s = {(s.u, s.v): a11 * s for s in box}
    a21q = {(q.u, q.v): a21 * q for q in box}

    def height_ok(x):
        return x.height() <= height

    for q in box:
        for s in box:
            checked += 1
            if fast:
                t = a11s[(s.u, s.v)] - a21q[(q.u, q.v)]
                if (t.u, t.v) not in allowed:
                    continue
            for delta in units:
                candidates = []
                if q.is_zero():
                    if not s.is_unit():
                        continue
                    p = delta * s.inverse()
                    if height_ok(p):
                        candidates = [(p, r) for r in box]
                else:
                    for p in box:
                        r = (p * s - delta).exact_div(q)
                        if r is not None and height_ok(r):
                            candidates.append((p, r))
                for p, r in candidates:
                    m1 = ((p, q), (r, s))
                    m2 = _sub2(A, m1)
                    det2 = _det2(m2)
                    if (det2.u, det2.v) in unit_keys:
                        found.append((m1, m2))
                        if len(found) >= limit:
                            return WitnessSearchReport(order.d, height, A, checked, tuple(found))
    logger.debug("witness search d=%d height=%d: %d (q, s) pairs checked", order.d, height, checked)
    return WitnessSearchReport(order.d, height, A, checked, tuple(found))


def _norm_form_has(order, n):
    """Is there an element of norm n (n > 0, imaginary order)?"""
    bound = 2 * n + 1
    return any(x.norm() == n for x in order.box(bound))


def nonprincipal_prime(order: QuadraticOrder):
    """Smallest odd prime p and b with (p, b + omega) a non-principal prime ideal."""
    omega = order.omega
    for p in primerange(3, 10_000):
        if _norm_form_has(order, p):
            continue
        for b in range(p):
            if (omega + b).norm() % p == 0:
                return p, b
    raise InvalidInputError(f"no non-principal prime ideal found for d={order.d}")


def vamos_witness(d, height_bound=10):
    """[[p, 0], [b + omega, 0]] over O(Q(sqrt(-d))) and the bounded two-unit search."""
    if d <= 0:
        raise InvalidInputError(f"d must be positive, got {d}")
    if d in CLASS_NUMBER_ONE:
        raise HypothesisFailure(f"Q(sqrt(-{d})) has class number 1: no non-principal ideal to build a witness from")
    order = QuadraticOrder(-d)
    p, b = nonprincipal_prime(order)
    a1 = order.integer(p)
    a2 = order.omega + b
    zero = order.zero
    A = ((a1, zero), (a2, zero))
    report = search_two_unit_decompositions(A, order, height_bound)
    report = replace(report, ideal=f"({p}, {a2})")
    logger.info("witness d=%d ideal %s: %d decompositions at height %d", d, report.ideal,
                len(report.decompositions), height_bound)
    return A, report
