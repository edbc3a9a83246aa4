"""The twin-prime pair sieve.

An integer m is a *twin rank* when 6m-1 and 6m+1 are both prime, and a
*non-rank* otherwise. For every prime p >= 5 the non-ranks form the two
arithmetic progressions n*p +- N(p/6) (N = nearest integer), because the
matching member of the pair 6k -+ 1 is then divisible by p. Sieving the
progressions of all primes 5 <= p <= p_j out of one full period
[1, L(p_j)], L(p_j) = prod_{5<=p<=p_j} p, leaves the *remnants*: twin ranks
plus non-ranks owned by primes larger than p_j. The remnant count over a
full period is exactly prod_{5<=p<=p_j} (p-2), which this module both
computes and re-derives by brute enumeration.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import primes as pr
from .errors import AmbiguityError, DomainError, InvariantViolationError

# Largest period materialized as an explicit bitset; larger periods are
# handled by segmented counting or symbolic (p, class) representations.
MAX_MATERIALIZED_PERIOD = 200_000_000

COUNT_SEGMENT = 1 << 24


def nearest_integer(x) -> int:
    """Integer nearest to the rational x. Exact half-integers are refused;
    the inputs p/6 used by the sieve never produce one."""
    xf = Fraction(x)
    twice = 2 * xf
    if twice.denominator == 1 and twice.numerator % 2 != 0:
        raise AmbiguityError(f"{x} is an exact half-integer; nearest integer undefined")
    return math.floor(xf + Fraction(1, 2))


@dataclass(frozen=True)
class NonRankProgressionPair:
    """Modulus p with offset N(p/6); the two non-rank residue classes mod p."""

    p: int
    offset: int
    classes: tuple[int, int]

    def __post_init__(self):
        if not (1 <= self.offset <= self.p // 2):
            raise InvariantViolationError(f"offset {self.offset} out of range for p={self.p}")
        lo = 6 * self.offset - 1
        hi = 6 * self.offset + 1
        if lo % self.p != 0 and hi % self.p != 0:
            raise InvariantViolationError(f"6*{self.offset} -+ 1 not divisible by {self.p}")


def nonrank_offsets(p: int) -> NonRankProgressionPair:
    """The progression pair of parent prime p >= 5."""
    if p < 5 or not pr.is_prime(p):
        raise DomainError(f"parent prime must be >= 5, got {p}")
    off = nearest_integer(Fraction(p, 6))
    return NonRankProgressionPair(p=p, offset=off, classes=(off % p, (p - off) % p))


def is_twin_rank(m: int) -> bool:
    """True iff 6m-1 and 6m+1 are both prime (m >= 1)."""
    if m < 1:
        return False
    return pr.is_prime(6 * m - 1) and pr.is_prime(6 * m + 1)


@dataclass(frozen=True)
class SieveContext:
    """The tuple anchoring every identity at a primorial argument.

    j       index of p_j among all primes (p_1 = 2, p_2 = 3, p_3 = 5, ...)
    p_j     sieving bound, prime >= 5
    L       full period prod_{5<=p<=p_j} p
    M_next  (p_{j+1}^2 - 1)/6: guaranteed-twin-rank horizon of the remnants
    x       L - M_next: the Legendre-identity argument (negative for p_j = 5)
    """

    j: int
    p_j: int
    L: int
    M_next: int
    x: int

    @classmethod
    def for_prime(cls, p_j: int) -> "SieveContext":
        if p_j < 5 or not pr.is_prime(p_j):
            raise DomainError(f"sieve context needs a prime >= 5, got {p_j}")
        table = pr.primes_up_to(2 * p_j + 200)  # Bertrand: contains p_{j+1}
        j = table.index_of(p_j)
        p_next = int(table.primes[j])  # index_of is 1-based: primes[j] is p_{j+1}
        if (p_next * p_next - 1) % 6 != 0:
            raise InvariantViolationError(f"p_{{j+1}}^2 - 1 = {p_next}^2-1 not divisible by 6")
        L = pr.primorial_L(p_j)
        M_next = (p_next * p_next - 1) // 6
        return cls(j=j, p_j=p_j, L=L, M_next=M_next, x=L - M_next)

    def sieving_primes(self) -> list[int]:
        return [p for p in pr.primes_up_to(self.p_j) if p >= 5]


def _class_mask(length: int, start_value: int, pairs: list[NonRankProgressionPair]) -> np.ndarray:
    """Boolean mask over values start_value..start_value+length-1 marking
    membership in any progression class of `pairs`."""
    mask = np.zeros(length, dtype=bool)
    for pair in pairs:
        for c in set(pair.classes):
            first = (c - start_value) % pair.p
            mask[first :: pair.p] = True
    return mask


def nonranks_to_parent(p: int, ctx: SieveContext) -> np.ndarray:
    """A_p within [1, L]: members of p's progressions that were not already
    struck by a smaller parent 5 <= p' < p. Ascending array."""
    if p < 5 or p > ctx.p_j or not pr.is_prime(p):
        raise DomainError(f"parent {p} out of range for context p_j={ctx.p_j}")
    if ctx.L > MAX_MATERIALIZED_PERIOD:
        raise DomainError(f"period {ctx.L} too large to materialize")
    own = _class_mask(ctx.L, 1, [nonrank_offsets(p)])
    earlier = [nonrank_offsets(q) for q in ctx.sieving_primes() if q < p]
    if earlier:
        own &= ~_class_mask(ctx.L, 1, earlier)
    return np.nonzero(own)[0] + 1


def supergroup(ctx: SieveContext) -> np.ndarray:
    """All non-ranks to parents 5 <= p <= p_j within [1, L], ascending."""
    if ctx.L > MAX_MATERIALIZED_PERIOD:
        raise DomainError(f"period {ctx.L} too large to materialize")
    pairs = [nonrank_offsets(p) for p in ctx.sieving_primes()]
    mask = _class_mask(ctx.L, 1, pairs)
    return np.nonzero(mask)[0] + 1


def supergroup_mask_window(ctx: SieveContext, lo: int, hi: int) -> np.ndarray:
    """Membership mask of the supergroup on the window [lo, hi] (inclusive)."""
    pairs = [nonrank_offsets(p) for p in ctx.sieving_primes()]
    return _class_mask(hi - lo + 1, lo, pairs)


@dataclass(frozen=True)
class RemnantSet:
    """The remnants of one full period: [1, L] minus the supergroup."""

    context: SieveContext
    remnants: np.ndarray

    def __len__(self) -> int:
        return len(self.remnants)


def remnant_set(ctx: SieveContext) -> RemnantSet:
    if ctx.L > MAX_MATERIALIZED_PERIOD:
        raise DomainError(f"period {ctx.L} too large to materialize")
    members = supergroup(ctx)
    mask = np.ones(ctx.L + 1, dtype=bool)
    mask[0] = False
    mask[members] = False
    return RemnantSet(context=ctx, remnants=np.nonzero(mask)[0])


def remnant_count_R0(p_j: int) -> int:
    """Exact remnant count over one period: prod_{5<=p<=p_j} (p - 2)."""
    if p_j < 5 or not pr.is_prime(p_j):
        raise DomainError(f"remnant count needs a prime >= 5, got {p_j}")
    out = 1
    for p in pr.primes_up_to(p_j):
        if p >= 5:
            out *= p - 2
    return out


def _count_window(lo: int, hi: int, pattern: np.ndarray, big: list[NonRankProgressionPair]) -> int:
    """Survivors of all progressions among the integers [lo, hi)."""
    m = len(pattern)
    n = hi - lo
    reps = n // m + 2
    block = np.tile(pattern, reps)[lo % m : lo % m + n].copy()
    for pair in big:
        for c in set(pair.classes):
            first = (c - lo) % pair.p
            block[first :: pair.p] = False
    return int(np.count_nonzero(block))


def count_remnants(ctx: SieveContext, segment_size: int = COUNT_SEGMENT, threads: int | None = None) -> int:
    """|[1, L] \\ supergroup| by segmented enumeration (no product formula).

    The progressions of the parents <= 13 are precomputed as one periodic
    pattern; larger parents are struck per segment. Segments are independent
    and merged by summation, so they may be counted in parallel
    (TWINSIEVE_THREADS, default 1).
    """
    prs = ctx.sieving_primes()
    small = [p for p in prs if p <= 13]
    big = [nonrank_offsets(p) for p in prs if p > 13]
    period = math.prod(small) if small else 1
    pattern = ~_class_mask(period, 0, [nonrank_offsets(p) for p in small])
    if threads is None:
        threads = int(os.environ.get("TWINSIEVE_THREADS", "1"))
    windows = [(lo, min(lo + segment_size, ctx.L + 1)) for lo in range(1, ctx.L + 1, segment_size)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = pool.map(lambda w: _count_window(w[0], w[1], pattern, big), windows)
            return sum(counts)
    return sum(_count_window(lo, hi, pattern, big) for lo, hi in windows)


def front_twin_ranks(ctx: SieveContext) -> np.ndarray:
    """Remnants <= M_next. Every one of them must be a twin rank; a failure
    would falsify the sieve construction and raises InvariantViolationError."""
    window = supergroup_mask_window(ctx, 1, ctx.M_next)
    front = np.nonzero(~window)[0] + 1
    for m in front:
        if not is_twin_rank(int(m)):
            raise InvariantViolationError(
                f"remnant {m} <= M={ctx.M_next} for p_j={ctx.p_j} is not a twin rank"
            )
    return front


@dataclass(frozen=True)
class LogPrimorialDiagnostic:
    """log L(p_j) against p_j and log x, for asymptotics inspection."""

    p_j: int
    log_L: float
    log_x: float
    log_L_minus_pj: float
    log_L_minus_log_x: float


def log_primorial_diagnostic(p_j: int) -> LogPrimorialDiagnostic:
    ctx = SieveContext.for_prime(p_j)
    log_L = sum(math.log(p) for p in ctx.sieving_primes())
    log_x = math.log(ctx.x) if ctx.x > 0 else math.nan
    return LogPrimorialDiagnostic(
        p_j=p_j,
        log_L=log_L,
        log_x=log_x,
        log_L_minus_pj=log_L - p_j,
        log_L_minus_log_x=log_L - log_x if ctx.x > 0 else math.nan,
    )


# ---------------------------------------------------------------------------
# Progression generation versus the primality definition.
# ---------------------------------------------------------------------------

def nonranks_by_definition(limit: int) -> np.ndarray:
    """Mask over 0..limit: m is a non-rank (not a twin rank), by primality."""
    mask = pr.sieve_mask(6 * limit + 2)
    out = np.ones(limit + 1, dtype=bool)
    out[0] = False  # 0 is outside the positive-integer domain
    ms = np.arange(1, limit + 1)
    out[1:] = ~(mask[6 * ms - 1] & mask[6 * ms + 1])
    return out


def nonranks_by_generation(limit: int) -> np.ndarray:
    """Mask over 0..limit: m generated as n*p +- N(p/6) for some prime p >= 5.

    Progression members with n >= 1 are always emitted: the matching pair
    member is a proper multiple of p, hence composite. The n = 0 member
    k = N(p/6) has the pair (p, p +- 2) itself; it is emitted only when the
    co-member p +- 2 is composite, since otherwise k is a twin rank.
    """
    out = np.zeros(limit + 1, dtype=bool)
    gen_bound = 6 * limit + 3  # n=0 members k = N(p/6) <= limit need p <= 6*limit+3
    for p in pr.primes_up_to(gen_bound):
        p = int(p)
        if p < 5:
            continue
        off = (p + 3) // 6  # nearest_integer(p/6) for p = 6k -+ 1
        # n >= 1 members: n*p + off starting at p + off, n*p - off starting at p - off
        for start in (p + off, p - off):
            if start <= limit:
                out[start::p] = True
        if off <= limit:
            co = p + 2 if p % 6 == 5 else p - 2
            if not pr.is_prime(co):
                out[off] = True
    return out


def generated_nonranks_with_witness(limit: int) -> list[tuple[int, int, int]]:
    """(k, p, composite_member) for every n >= 1 progression member k <= limit.

    The composite member 6k -+ 1 equals p*(6n +- 1) with n >= 1, so it is a
    proper multiple of p; the caller can assert compositeness directly.
    """
    out = []
    for p in pr.primes_up_to(2 * limit + 10):
        p = int(p)
        if p < 5:
            continue
        off = (p + 3) // 6
        n = 1
        while n * p - off <= limit:
            for k in (n * p - off, n * p + off):
                if 1 <= k <= limit:
                    member = 6 * k - 1 if (6 * k - 1) % p == 0 else 6 * k + 1
                    out.append((k, p, member))
            n += 1
    return out


# ---------------------------------------------------------------------------
# CSV export.
# ---------------------------------------------------------------------------

def write_progressions_csv(path: str, p_j: int) -> None:
    """Progression table for all parents 5 <= p <= p_j."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "offset", "class1", "class2"])
        for p in pr.primes_up_to(p_j):
            if p < 5:
                continue
            pair = nonrank_offsets(int(p))
            w.writerow([pair.p, pair.offset, pair.classes[0], pair.classes[1]])


def write_remnants_csv(path: str, remnants) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"])
        for k in remnants:
            w.writerow([int(k)])
