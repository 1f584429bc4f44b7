"""
Volume of the polyhedron {g < 1}: the function g, seeded Monte Carlo
estimates, the exact values that are known, and the region decomposition
for s = 2.

    g(x) = sum_i max{0, x_1i, ..., x_ni} + max{0, -sum_i x_1i, ..., -sum_i x_ni}

for an n x s matrix x. The volume is the constant c_{n,s} of the unit sum
counting asymptotics.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from errors import InvalidInputError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10_000
DEFAULT_STREAMS = 8
CHUNK = 1 << 17
LOW_HIT_RATE = 1e-5
TARGET_RELATIVE_ERROR = 0.02

# Printed values, keyed by (n, s).
PRINTED_TABLE = {
    (1, 1): Fraction(2), (2, 1): Fraction(3), (3, 1): Fraction(4), (4, 1): Fraction(5), (5, 1): Fraction(6),
    (1, 2): Fraction(3), (2, 2): Fraction(15, 4), (3, 2): Fraction(7, 2), (4, 2): Fraction(45, 16),
    (1, 3): Fraction(10, 3), (2, 3): Fraction(7, 3), (3, 3): Fraction(55, 54),
    (1, 4): Fraction(35, 12), (2, 4): Fraction(275, 32),
    (1, 5): Fraction(21, 10),
}

# Printed entries that cannot be right, with the value they were most likely meant to be.
PRINTED_CORRECTIONS = {
    (2, 4): (Fraction(55, 64), "above c_{1,4}^2; Monte Carlo gives 275/320 = 55/64, a dropped factor of 10"),
}

# Sign patterns of (x_K, y_L, -x_M - y_M) per case, True meaning >= 0.
CASE_SIGNS = {
    1: (True, False, False),
    2: (False, True, False),
    3: (False, False, True),
    4: (True, True, False),
    5: (True, False, True),
    6: (False, True, True),
    7: (True, True, True),
}


@dataclass(frozen=True)
class PolytopeSpec:
    n: int
    s: int

    def __post_init__(self):
        if self.n < 1 or self.s < 1:
            raise InvalidInputError(f"n and s must be positive, got n={self.n}, s={self.s}")

    @property
    def dim(self):
        return self.n * self.s

    @property
    def box(self):
        """Every point of {g < 1} has all coordinates in [-s, 1]."""
        return (-self.s, 1)

    @property
    def box_volume(self):
        return float(self.s + 1) ** self.dim


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    method: str = "box"
    region_tag: Optional[Tuple] = None
    hits: Optional[int] = None
    warning: Optional[str] = None

    def z_score(self, exact):
        if self.std_error == 0:
            return 0.0 if abs(self.mean - float(exact)) < 1e-12 else math.inf
        return (self.mean - float(exact)) / self.std_error

    def agrees(self, exact, sigmas=3.0):
        return abs(self.z_score(exact)) <= sigmas

    def to_json(self):
        payload = {
            "mean": format(self.mean, ".12g"),
            "std_error": format(self.std_error, ".6g"),
            "samples": self.samples,
            "seed": self.seed,
            "method": self.method,
        }
        if self.region_tag is not None:
            payload["region"] = list(self.region_tag)
        if self.hits is not None:
            payload["hits"] = self.hits
        if self.warning:
            payload["warning"] = self.warning
        return payload


def g_batch(x):
    """g for every n x s matrix along the first axis of x (shape (m, n, s))."""
    column_max = np.maximum(x.max(axis=1), 0.0).sum(axis=1)
    row_term = np.maximum((-x.sum(axis=2)).max(axis=1), 0.0)
    return column_max + row_term


def g_value(x):
    """g of one matrix; a flat sequence is read as a single row."""
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("g needs finite entries")
    return float(g_batch(arr[None, ...])[0])


def _rng(seed, *key):
    """Philox stream for (seed, key); the same key always gives the same stream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def _split(samples, streams):
    base, extra = divmod(samples, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


def _check_samples(samples):
    if samples < MIN_SAMPLES:
        raise InvalidInputError(f"samples must be at least {MIN_SAMPLES}, got {samples}")


def _run_streams(worker, samples, streams, threads):
    counts = _split(samples, streams)
    if threads <= 1:
        return [worker(i, counts[i]) for i in range(streams)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(worker, range(streams), counts))


def _low_rate_warning(p):
    if p >= LOW_HIT_RATE:
        return None
    suggested = math.ceil((1 - p) / (p * TARGET_RELATIVE_ERROR ** 2)) if p > 0 else None
    message = (f"hit rate {p:.3g} below {LOW_HIT_RATE:g}; about {suggested} samples give "
               f"{TARGET_RELATIVE_ERROR:.0%} relative error" if suggested
               else f"no hits; increase samples well beyond the current count")
    logger.warning(message)
    return message


def _sample_rows(rng, m, n, s):
    """m uniform points of P^n where P = {g < 1} for a single row (n = 1).

    For one row g = max(sum of positive parts, sum of negative parts), so P
    splits by sign pattern into products of two corner simplices. A pattern
    with a positive coordinates has volume 1/(a!(s-a)!), hence weight C(s,a)^2.
    """
    weights = np.array([math.comb(s, a) ** 2 for a in range(s + 1)], dtype=float)
    a = rng.choice(s + 1, size=(m, n), p=weights / weights.sum())
    ranks = rng.random((m, n, s)).argsort(axis=2).argsort(axis=2)
    positive = ranks < a[..., None]
    e = rng.standard_exponential((m, n, s))
    slack = rng.standard_exponential((m, n, 2))
    pos_total = np.where(positive, e, 0.0).sum(axis=2) + slack[..., 0]
    neg_total = np.where(positive, 0.0, e).sum(axis=2) + slack[..., 1]
    return np.where(positive, e / pos_total[..., None], -e / neg_total[..., None])


def _count_hits(spec, seed, method):
    lo, hi = spec.box

    def worker(stream, count):
        rng = _rng(seed, stream)
        hits = 0
        done = 0
        while done < count:
            m = min(CHUNK, count - done)
            if method == "box":
                x = rng.uniform(lo, hi, size=(m, spec.n, spec.s))
            else:
                x = _sample_rows(rng, m, spec.n, spec.s)
            hits += int(np.count_nonzero(g_batch(x) < 1.0))
            done += m
        return hits

    return worker


def mc_volume(spec: PolytopeSpec, samples, seed, method="box", streams=DEFAULT_STREAMS, threads=1) -> McEstimate:
    """Estimate c_{n,s} = vol{g < 1}.

    box     uniform points of [-s, 1]^{ns}
    rows    uniform points of the product of the single-row polyhedra, whose
            volume c_{1,s}^n is exact
    regions s = 2 only: sum of reduced region estimates over index patterns
    """
    _check_samples(samples)
    if method == "regions":
        return _mc_volume_regions(spec, samples, seed, streams, threads)
    if method not in ("box", "rows"):
        raise InvalidInputError(f"unknown method {method!r}; expected box, rows or regions")

    hits = sum(_run_streams(_count_hits(spec, seed, method), samples, streams, threads))
    p = hits / samples
    volume = spec.box_volume if method == "box" else float(closed_form(1, spec.s)) ** spec.n
    logger.debug("mc_volume n=%d s=%d method=%s: %d hits of %d", spec.n, spec.s, method, hits, samples)
    return McEstimate(
        mean=volume * p,
        std_error=volume * math.sqrt(p * (1 - p) / samples),
        samples=samples,
        seed=seed,
        method=method,
        hits=hits,
        warning=_low_rate_warning(p),
    )


def closed_form(n, s) -> Optional[Fraction]:
    """Exact c_{n,s} where known.

    c_{n,1} = n + 1, c_{1,s} = C(2s, s)/s!, c_{n,2} = (n+1)(2n+1)/2^n, and
    the remaining printed entries that respect c_{n,s} <= c_{1,s}^n.
    """
    if n < 1 or s < 1:
        raise InvalidInputError(f"n and s must be positive, got n={n}, s={s}")
    if s == 1:
        return Fraction(n + 1)
    if n == 1:
        return Fraction(math.comb(2 * s, s), math.factorial(s))
    if s == 2:
        return Fraction((n + 1) * (2 * n + 1), 2 ** n)
    printed = PRINTED_TABLE.get((n, s))
    if printed is not None and respects_row_bound(n, s, printed):
        return printed
    return None


def respects_row_bound(n, s, value):
    """g dominates the single-row g of every row, so c_{n,s} <= c_{1,s}^n."""
    return Fraction(value) <= closed_form(1, s) ** n


def printed_table():
    """The printed c_{n,s} values as (n, s, value) rows."""
    return [(n, s, value) for (n, s), value in sorted(PRINTED_TABLE.items(), key=lambda kv: (kv[0][1], kv[0][0]))]


def _check_n2(n):
    if n < 2:
        raise InvalidInputError(f"the region values need n >= 2, got n={n}")


def i_123(n) -> Fraction:
    _check_n2(n)
    return Fraction(2 * (n + 1) * (2 * n + 1), n * (2 * n - 1) * (n - 1) * 2 ** n)


def i_112(n) -> Fraction:
    return i_123(n) / 2


def _pattern(klm):
    K, L, M = klm
    if K == L == M:
        return "111"
    if len({K, L, M}) == 3:
        return "123"
    return "112"


def region_exact(n, klm=(1, 2, 3), case=None) -> Fraction:
    """Exact volume of V_{K,L,M} (restricted to a sign case when given), n >= 2."""
    _check_n2(n)
    _check_region(n, klm, case)
    pattern = _pattern(klm)
    if pattern == "111":
        return Fraction(0)
    scale = 2 if pattern == "123" else 1
    if case is None:
        return i_123(n) if pattern == "123" else i_112(n)
    if case <= 3:
        return Fraction(scale, n * (2 * n - 1) * (n - 1) * 2 ** n)
    if case <= 6:
        return Fraction(scale, n * (n - 1) * 2 ** n)
    return Fraction(scale, n * 2 ** n)


def _check_region(n, klm, case):
    if len(klm) != 3 or not all(1 <= i <= n for i in klm):
        raise InvalidInputError(f"indices {klm} must lie in 1..{n}")
    if case is not None and case not in CASE_SIGNS:
        raise InvalidInputError(f"case must be in 1..7, got {case}")


def _region_mask(xk, yl, sm, case):
    g = np.maximum(xk, 0.0) + np.maximum(yl, 0.0) + np.maximum(-sm, 0.0)
    mask = g < 1.0
    if case is not None:
        want = CASE_SIGNS[case]
        for value, nonneg in zip((xk, yl, -sm), want):
            mask &= (value >= 0) if nonneg else (value < 0)
    return mask


def _reduced_worker(n, klm, case, seed, tag):
    core = list(dict.fromkeys(klm))
    m = len(core)
    iK, iL, iM = (core.index(i) for i in klm)
    free = n - m

    def worker(stream, count):
        rng = _rng(seed, *tag, stream)
        total = 0.0
        total_sq = 0.0
        done = 0
        while done < count:
            size = min(CHUNK, count - done)
            pts = rng.uniform(-2.0, 1.0, size=(size, m, 2))
            x, y = pts[..., 0], pts[..., 1]
            xk, yl = x[:, iK], y[:, iL]
            sm = x[:, iM] + y[:, iM]
            mask = _region_mask(xk, yl, sm, case)
            mask &= np.all(x <= xk[:, None], axis=1)
            mask &= np.all(y <= yl[:, None], axis=1)
            mask &= np.all(x + y >= sm[:, None], axis=1)
            # each index outside the core ranges over a triangle of area T^2/2
            t = xk + yl - sm
            w = np.where(mask, (t * t / 2.0) ** free, 0.0)
            total += float(w.sum())
            total_sq += float((w * w).sum())
            done += size
        return total, total_sq

    return worker, 9.0 ** m


def _direct_worker(n, klm, case, seed, tag):
    K, L, M = (i - 1 for i in klm)

    def worker(stream, count):
        rng = _rng(seed, *tag, stream)
        hits = 0
        done = 0
        while done < count:
            size = min(CHUNK, count - done)
            pts = rng.uniform(-2.0, 1.0, size=(size, n, 2))
            x, y = pts[..., 0], pts[..., 1]
            xk, yl = x[:, K], y[:, L]
            sm = x[:, M] + y[:, M]
            mask = _region_mask(xk, yl, sm, case)
            mask &= np.all(x <= xk[:, None], axis=1)
            mask &= np.all(y <= yl[:, None], axis=1)
            mask &= np.all(x + y >= sm[:, None], axis=1)
            hits += int(np.count_nonzero(mask))
            done += size
        return hits

    return worker, 9.0 ** n


def region_volume_mc(n, klm, case=None, samples=1_000_000, seed=0, method="reduced",
                     streams=DEFAULT_STREAMS, threads=1, tag=()) -> McEstimate:
    """Volume of V_{K,L,M} = {x_i <= x_K, y_i <= y_L, x_M + y_M <= x_i + y_i, g < 1}, s = 2.

    reduced  samples only the coordinates of K, L, M and integrates the rest
             exactly; weights (T^2/2)^{n-m}, T = x_K + y_L - x_M - y_M
    direct   uniform points of [-2, 1]^{2n}
    """
    _check_samples(samples)
    _check_region(n, klm, case)
    klm = tuple(klm)
    region_tag = klm + ((case,) if case is not None else ())
    tag = tuple(tag) or (sum(i * 10 ** p for p, i in enumerate(region_tag)),)
    if method == "reduced":
        worker, volume = _reduced_worker(n, klm, case, seed, tag)
        parts = _run_streams(worker, samples, streams, threads)
        total = sum(p[0] for p in parts)
        total_sq = sum(p[1] for p in parts)
        mean_w = total / samples
        var_w = max(total_sq - samples * mean_w * mean_w, 0.0) / (samples - 1)
        return McEstimate(volume * mean_w, volume * math.sqrt(var_w / samples), samples, seed,
                          method="reduced", region_tag=region_tag)
    if method == "direct":
        worker, volume = _direct_worker(n, klm, case, seed, tag)
        hits = sum(_run_streams(worker, samples, streams, threads))
        p = hits / samples
        return McEstimate(volume * p, volume * math.sqrt(p * (1 - p) / samples), samples, seed,
                          method="direct", region_tag=region_tag, hits=hits, warning=_low_rate_warning(p))
    raise InvalidInputError(f"unknown method {method!r}; expected reduced or direct")


def _index_patterns(n):
    """Representative (K, L, M) per orbit of index permutations, with orbit sizes."""
    patterns = [((1, 1, 1), n)]
    if n >= 2:
        patterns += [((1, 1, 2), n * (n - 1)), ((1, 2, 1), n * (n - 1)), ((2, 1, 1), n * (n - 1))]
    if n >= 3:
        patterns.append(((1, 2, 3), n * (n - 1) * (n - 2)))
    return patterns


def _mc_volume_regions(spec, samples, seed, streams, threads):
    if spec.s != 2:
        raise InvalidInputError(f"the regions method needs s = 2, got s={spec.s}")
    mean = 0.0
    var = 0.0
    for index, (klm, weight) in enumerate(_index_patterns(spec.n)):
        est = region_volume_mc(spec.n, klm, None, samples, seed, streams=streams, threads=threads,
                               tag=(index,))
        mean += weight * est.mean
        var += (weight * est.std_error) ** 2
    return McEstimate(mean, math.sqrt(var), samples, seed, method="regions")


def c_n2_identity_report(n, samples, seed, streams=DEFAULT_STREAMS, threads=1):
    """Both sides of c_{n,2} = n(n-1)(n-2) I_123 + 3n(n-1) I_112, exactly and by Monte Carlo."""
    _check_n2(n)
    c = closed_form(n, 2)
    w123 = n * (n - 1) * (n - 2)
    w112 = 3 * n * (n - 1)
    exact_rhs = w123 * i_123(n) + w112 * i_112(n)

    left = mc_volume(PolytopeSpec(n, 2), samples, seed, method="rows", streams=streams, threads=threads)
    regions = {}
    patterns = [(1, 1, 2)] + ([(1, 2, 3)] if n >= 3 else [])
    for klm in patterns:
        regions[klm] = region_volume_mc(n, klm, None, samples, seed, streams=streams, threads=threads)
    rhs_mean = w112 * regions[(1, 1, 2)].mean
    rhs_var = (w112 * regions[(1, 1, 2)].std_error) ** 2
    if n >= 3:
        rhs_mean += w123 * regions[(1, 2, 3)].mean
        rhs_var += (w123 * regions[(1, 2, 3)].std_error) ** 2
    rhs_std = math.sqrt(rhs_var)
    joint = math.sqrt(left.std_error ** 2 + rhs_var)

    cases = []
    for klm in patterns:
        estimates = {r: region_volume_mc(n, klm, r, samples, seed, streams=streams, threads=threads)
                     for r in CASE_SIGNS}
        for r, est in estimates.items():
            exact = region_exact(n, klm, r)
            cases.append({"klm": list(klm), "case": r, "exact": exact, "mc": est.to_json(),
                          "z": round(est.z_score(exact), 3), "agrees": est.agrees(exact)})
        for group in ((1, 2, 3), (4, 5, 6)):
            for a, b in zip(group, group[1:]):
                ea, eb = estimates[a], estimates[b]
                diff = abs(ea.mean - eb.mean)
                sigma = math.sqrt(ea.std_error ** 2 + eb.std_error ** 2)
                cases.append({"klm": list(klm), "group_check": [a, b],
                              "agrees": diff <= 3 * sigma})

    return {
        "n": n,
        "seed": seed,
        "samples": samples,
        "closed_form": c,
        "exact_rhs": exact_rhs,
        "exact_identity_holds": exact_rhs == c,
        "mc_left": left.to_json(),
        "mc_right": {"mean": format(rhs_mean, ".12g"), "std_error": format(rhs_std, ".6g")},
        "mc_sides_agree": abs(left.mean - rhs_mean) <= 3 * joint,
        "mc_left_matches_closed_form": left.agrees(c),
        "regions": {"".join(map(str, k)): v.to_json() for k, v in regions.items()},
        "cases": cases,
    }


def table_report(samples, big_samples, seed, streams=DEFAULT_STREAMS, threads=1):
    """One row per printed c_{n,s}: the closed form where one exists, Monte Carlo otherwise."""
    rows = []
    for n, s, printed in printed_table():
        exact = closed_form(n, s)
        formula = s in (1, 2) or n == 1
        row = {
            "n": n,
            "s": s,
            "printed": printed,
            "closed_form": exact if formula else None,
            "within_row_bound": respects_row_bound(n, s, printed),
        }
        if formula:
            row["matches"] = exact == printed
        else:
            count = big_samples if (n, s) == (2, 4) else samples
            est = mc_volume(PolytopeSpec(n, s), count, seed, method="rows", streams=streams, threads=threads)
            row.update(mc_mean=format(est.mean, ".8g"), mc_std_error=format(est.std_error, ".3g"),
                       samples=count, seed=seed, z=round(est.z_score(printed), 3),
                       matches=est.agrees(printed))
        if (n, s) in PRINTED_CORRECTIONS:
            likely, note = PRINTED_CORRECTIONS[(n, s)]
            row.update(note=note, likely_value=likely)
            if "mc_mean" in row:
                row["likely_z"] = round(est.z_score(likely), 3)
        if not row["within_row_bound"]:
            logger.warning("printed c_{%d,%d} = %s exceeds c_{1,%d}^%d = %s", n, s, printed, s, n,
                           closed_form(1, s) ** n)
        rows.append(row)
    return rows
