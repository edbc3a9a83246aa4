"""Exact evaluation of the Legendre-type twin-pair counting identity.

With x = L(p_j) - M(j+1) the identity reads

    pi2(6x+1)  =  R0  +  sum_{n <= x, n | L_j(x)} mu(n) 2^nu(n) floor(x/n)  +  E,

where R0 = prod_{5<=p<=p_j}(p-2) is the full-period remnant count, the sum
runs over squarefree n whose prime factors all lie in (p_j, x], and the
error E is asymptotically bounded. Nothing here assumes a value for E: all
three pieces are computed exactly and the discrepancy is recorded.

The fractional-part companion sum over the same n, with {x/n} in place of
floor(x/n), is kept as an exact rational.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np

from . import primes as pr
from .errors import DomainError, EnumerationCapError
from .pairsieve import SieveContext, remnant_count_R0

DEFAULT_NODE_CAP = 10**8


def pi2_brute(limit: int) -> int:
    """Number of m >= 1 with 6m+1 <= limit and 6m-1, 6m+1 both prime.

    Counts pairs of the shape 6m -+ 1, which excludes the pair (3, 5).
    """
    if limit < 7:
        return 0
    mask = pr.sieve_mask(limit + 1)
    m_max = (limit - 1) // 6
    ms = np.arange(1, m_max + 1)
    return int(np.count_nonzero(mask[6 * ms - 1] & mask[6 * ms + 1]))


@dataclass(frozen=True)
class SmoothSquarefreeEnumeration:
    """All n <= x that are squarefree with every prime factor in (p_j, x],
    as ascending (n, mu(n), 2^nu(n)) triples. n = 1 is included."""

    context: SieveContext
    terms: list[tuple[int, int, int]]  # (n, mu, nu)

    def __len__(self) -> int:
        return len(self.terms)


def enumerate_smooth_squarefree(ctx: SieveContext, node_cap: int = DEFAULT_NODE_CAP) -> SmoothSquarefreeEnumeration:
    """Depth-first product enumeration over the primes in (p_j, x], pruned at
    products exceeding x. Complete and duplicate-free by construction."""
    if ctx.x <= 0:
        raise DomainError(f"context p_j={ctx.p_j} has x={ctx.x} <= 0")
    x = ctx.x
    plist = [int(p) for p in pr.primes_up_to(x).primes if p > ctx.p_j]
    terms: list[tuple[int, int, int]] = []
    nodes = 0

    # iterative DFS: stack carries (product, next_prime_index, nu)
    stack = [(1, 0, 0)]
    while stack:
        prod, i, k = stack.pop()
        nodes += 1
        if nodes > node_cap:
            raise EnumerationCapError(f"enumeration exceeded {node_cap} nodes at p_j={ctx.p_j}")
        terms.append((prod, -1 if k % 2 else 1, k))
        for idx in range(i, len(plist)):
            nxt = prod * plist[idx]
            if nxt > x:
                break
            stack.append((nxt, idx + 1, k + 1))
    terms.sort()
    return SmoothSquarefreeEnumeration(context=ctx, terms=terms)


def legendre_sum(enum: SmoothSquarefreeEnumeration) -> int:
    """sum mu(n) 2^nu(n) floor(x/n) over the enumeration, exactly."""
    x = enum.context.x
    return sum(mu * (1 << k) * (x // n) for n, mu, k in enum.terms)


@dataclass(frozen=True)
class LegendreReport:
    """All exactly-computed pieces of the counting identity at one context."""

    p_j: int
    L: int
    M: int
    x: int
    R0: int
    sum_floor: int
    pi2_true: int
    discrepancy: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def legendre_report(ctx: SieveContext, node_cap: int = DEFAULT_NODE_CAP) -> LegendreReport:
    if ctx.x <= 0:
        raise DomainError(f"context p_j={ctx.p_j} has x={ctx.x} <= 0")
    enum = enumerate_smooth_squarefree(ctx, node_cap=node_cap)
    s = legendre_sum(enum)
    r0 = remnant_count_R0(ctx.p_j)
    pi2 = pi2_brute(6 * ctx.x + 1)
    return LegendreReport(
        p_j=ctx.p_j,
        L=ctx.L,
        M=ctx.M_next,
        x=ctx.x,
        R0=r0,
        sum_floor=s,
        pi2_true=pi2,
        discrepancy=pi2 - r0 - s,
    )


@dataclass(frozen=True)
class FractionalRemainder:
    """The exact fractional-part companion sum over p_j < n < x.

    `value` is sum mu(n) 2^nu(n) {x/n} as a Fraction ({x/n} = (x mod n)/n).
    `bound_shape_ratio` compares |value| against the reference shape
    x * exp(-sqrt(c log x)) * (log x)^3 -- a scale diagnostic only, since no
    particular constant c is canonical.
    """

    p_j: int
    x: int
    value: Fraction
    value_float: float
    n_terms: int
    bound_shape_ratio: float


def remainder_RE(ctx: SieveContext, c: float = 1.0, node_cap: int = DEFAULT_NODE_CAP) -> FractionalRemainder:
    if ctx.x <= 0:
        raise DomainError(f"context p_j={ctx.p_j} has x={ctx.x} <= 0")
    enum = enumerate_smooth_squarefree(ctx, node_cap=node_cap)
    x = ctx.x
    total = Fraction(0)
    n_terms = 0
    for n, mu, k in enum.terms:
        if n <= ctx.p_j or n >= x:
            continue
        frac = Fraction(x % n, n)
        total += mu * (1 << k) * frac
        n_terms += 1
    lx = math.log(x)
    shape = x * math.exp(-math.sqrt(c * lx)) * lx**3
    return FractionalRemainder(
        p_j=ctx.p_j,
        x=x,
        value=total,
        value_float=float(total),
        n_terms=n_terms,
        bound_shape_ratio=abs(float(total)) / shape,
    )
