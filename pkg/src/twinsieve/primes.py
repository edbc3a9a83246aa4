"""Exact integer substrate.

Prime enumeration (segmented Eratosthenes), primorials restricted to p >= 5,
and the arithmetic functions mu (Moebius), nu (number of distinct prime
factors) and d3 (triple divisor function, coefficients of zeta^3).

Everything here is exact integer arithmetic; Python integers make the
primorial products overflow-free at any index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DEFAULT_SEGMENT = 1 << 20

# Deterministic Miller-Rabin witness set, valid for all n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _simple_sieve_mask(limit: int) -> np.ndarray:
    """Boolean primality mask for 0..limit by plain Eratosthenes."""
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if mask[i]:
            mask[i * i :: i] = False
    return mask


def sieve_mask(limit: int, segment_size: int = DEFAULT_SEGMENT) -> np.ndarray:
    """Primality mask for 0..limit, sieving in segments of `segment_size`.

    Each segment is marked independently from the base primes <= sqrt(limit);
    segments could be processed in any order (the merge is a plain write into
    disjoint slices).
    """
    if limit < 2:
        raise DomainError(f"prime sieve needs limit >= 2, got {limit}")
    root = math.isqrt(limit)
    base = _simple_sieve_mask(root)
    base_primes = np.nonzero(base)[0]
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    mask[: root + 1] = base
    for lo in range(root + 1, limit + 1, segment_size):
        hi = min(lo + segment_size, limit + 1)
        seg = mask[lo:hi]
        for p in base_primes:
            p = int(p)
            start = (-lo) % p
            seg[start::p] = False
    return mask


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, ascending, with O(1) membership."""

    limit: int
    primes: np.ndarray
    mask: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(int(p) for p in self.primes)

    def is_prime(self, n: int) -> bool:
        if n < 0 or n > self.limit:
            raise DomainError(f"{n} outside table limit {self.limit}")
        return bool(self.mask[n])

    def __contains__(self, n: int) -> bool:
        return 0 <= n <= self.limit and bool(self.mask[n])

    def index_of(self, p: int) -> int:
        """1-based index j with p_1 = 2, p_2 = 3, p_3 = 5, ..."""
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise DomainError(f"{p} is not prime (or beyond table)")
        return i + 1


def primes_up_to(limit: int, segment_size: int = DEFAULT_SEGMENT) -> PrimeTable:
    """PrimeTable of all primes <= limit. limit < 2 is an empty domain."""
    mask = sieve_mask(limit, segment_size)
    return PrimeTable(limit=limit, primes=np.nonzero(mask)[0].astype(np.int64), mask=mask)


def is_prime(n: int) -> bool:
    """Deterministic primality test (Miller-Rabin, proven witness set)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primorial_L(p_j: int) -> int:
    """Product of all primes p with 5 <= p <= p_j, exactly.

    This is the period of the pair sieve anchored at p_j.
    """
    if p_j < 5 or not is_prime(p_j):
        raise DomainError(f"primorial argument must be a prime >= 5, got {p_j}")
    out = 1
    for p in primes_up_to(p_j):
        if p >= 5:
            out *= p
    return out


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization [(p, e), ...] by trial division."""
    if n < 1:
        raise DomainError(f"factorization needs n >= 1, got {n}")
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p = 5
    while p * p <= n:
        for q in (p, p + 2):
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            if e:
                out.append((q, e))
        p += 6
    if n > 1:
        out.append((n, 1))
    return out


def mobius(n: int) -> int:
    """mu(n): (-1)^k on squarefree n with k prime factors, else 0."""
    out = 1
    for _, e in factorize(n):
        if e > 1:
            return 0
        out = -out
    return out


def nu(n: int) -> int:
    """Number of distinct prime factors of n; nu(1) = 0."""
    return len(factorize(n))


def d3(n: int) -> int:
    """Triple divisor function: number of ordered triples abc = n."""
    out = 1
    for _, e in factorize(n):
        out *= (e + 1) * (e + 2) // 2
    return out


@dataclass(frozen=True)
class ArithmeticFunctionCache:
    """Tables of mu, nu, d3 for 1..limit, built from one smallest-prime-factor
    sieve. Above the limit the scalar fallbacks factorize directly."""

    limit: int
    mu: np.ndarray
    nu: np.ndarray
    d3: np.ndarray
    spf: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, limit: int) -> "ArithmeticFunctionCache":
        if limit < 1:
            raise DomainError(f"cache limit must be >= 1, got {limit}")
        n = limit + 1
        spf = np.zeros(n, dtype=np.int64)
        for i in range(2, n):
            if spf[i] == 0:
                spf[i::i][spf[i::i] == 0] = i
        mu = np.zeros(n, dtype=np.int8)
        nu_t = np.zeros(n, dtype=np.int8)
        d3_t = np.zeros(n, dtype=np.int64)
        if limit >= 1:
            mu[1], nu_t[1], d3_t[1] = 1, 0, 1
        for i in range(2, n):
            p = spf[i]
            m, e = i, 0
            while m % p == 0:
                m //= p
                e += 1
            mu[i] = 0 if e > 1 else -mu[m]
            nu_t[i] = nu_t[m] + 1
            d3_t[i] = d3_t[m] * ((e + 1) * (e + 2) // 2)
        return cls(limit=limit, mu=mu, nu=nu_t, d3=d3_t, spf=spf)

    def mobius(self, n: int) -> int:
        return int(self.mu[n]) if 1 <= n <= self.limit else mobius(n)

    def nu_of(self, n: int) -> int:
        return int(self.nu[n]) if 1 <= n <= self.limit else nu(n)

    def d3_of(self, n: int) -> int:
        return int(self.d3[n]) if 1 <= n <= self.limit else d3(n)


def divisor_summatory(x: int) -> int:
    """D(x) = sum_{n<=x} d(n), by the hyperbola identity
    D(x) = 2*sum_{a<=sqrt(x)} floor(x/a) - floor(sqrt(x))^2."""
    if x < 1:
        return 0
    r = math.isqrt(x)
    s = sum(x // a for a in range(1, r + 1))
    return 2 * s - r * r


def d3_summatory(y: int) -> int:
    """Exact sum_{n < y} d3(n).

    Uses d3 = d * 1: sum_{n<=Y} d3(n) = sum_{m<=Y} D(floor(Y/m)), grouped over
    the O(sqrt(Y)) distinct values of floor(Y/m). Runs in ~Y^(3/4) time.
    """
    if y < 1:
        raise DomainError(f"d3 summatory needs y >= 1, got {y}")
    Y = y - 1
    if Y < 1:
        return 0
    total = 0
    cache: dict[int, int] = {}
    m = 1
    while m <= Y:
        q = Y // m
        m_hi = Y // q
        dq = cache.get(q)
        if dq is None:
            dq = divisor_summatory(q)
            cache[q] = dq
        total += (m_hi - m + 1) * dq
        m = m_hi + 1
    return total


@dataclass(frozen=True)
class D3SummatoryDiagnostic:
    """Growth diagnostic for sum_{n<y} d3(n) against its leading term.

    `leading_share` is (y (log y)^2 / 2) / summatory: the fraction of the
    exact sum explained by the leading term. The exact sum carries positive
    lower-order terms, so the share is below 1 and climbs toward 1 (very
    slowly) as y grows.
    """

    y: int
    summatory: int
    leading_term: float
    leading_share: float


def d3_summatory_diagnostic(y: int) -> D3SummatoryDiagnostic:
    s = d3_summatory(y)
    lead = y * math.log(y) ** 2 / 2.0
    return D3SummatoryDiagnostic(y=y, summatory=s, leading_term=lead, leading_share=lead / s)


