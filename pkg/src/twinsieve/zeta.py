"""Complex-analytic substrate.

Riemann zeta on sigma > 0 (Euler-Maclaurin), a branch-tracked log zeta and
the prime zeta function, the Euler products attached to the pair sieve, and
the integrands of the contour-integral experiments.

Products used throughout (s = sigma + it, p prime):

    twin factor         1 - 2/p^s
    correction factor   1 + 1/(p^s (p^s - 2))       (p > 2)
    correction product  D(s) = prod_{p>2} correction factor,
                        absolutely convergent for sigma > 1/2.

The identity  (1 - 2/p^s) * (1 + 1/(p^s(p^s-2))) = (1 - 1/p^s)^2  makes the
pole of a correction factor at p^s = 2 cancel against the zero of the twin
factor; it also yields

    prod_{p>2}(1 - 2/p^s) * zeta(s)^2 * D(s) * (1 - 2^{-s})^2 = 1,

which the verification entry point checks numerically.

High-accuracy product values are obtained from the prime zeta function
P(z) = sum_p p^{-z} through the exact log expansions

    log prod_{p>P0}(1 - 2 p^{-s})          = - sum_{m>=1} (2^m / m)    * T_m
    log prod_{p>P0}(1 + 1/(p^s(p^s-2)))    =   sum_{m>=2} ((2^m-2)/m) * T_m

with T_m = P(m s) - sum_{p<=P0} p^{-ms}; both series converge geometrically
once 2 * q^{-sigma} < 1 for the first prime q > P0. Truncating the m-sums at
the geometric tail bound (never at the computed term size) keeps the huge
coefficients 2^m/m from amplifying floating-point noise.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import primes as pr
from .errors import DomainError, PoleError, SingularFactorError

# ---------------------------------------------------------------------------
# Bernoulli numbers and Euler-Maclaurin zeta.
# ---------------------------------------------------------------------------

_EM_ORDER_MAX = 20


@lru_cache(maxsize=1)
def _bernoulli_even_floats() -> tuple[float, ...]:
    """(B_0, B_2, B_4, ..., B_40) computed exactly then rounded once."""
    n_max = 2 * _EM_ORDER_MAX
    B = [Fraction(1)]
    for m in range(1, n_max + 1):
        s = Fraction(0)
        for j in range(m):
            s += Fraction(math.comb(m + 1, j)) * B[j]
        B.append(-s / (m + 1))
    return tuple(float(B[2 * k]) for k in range(_EM_ORDER_MAX + 1))


def _em_cutoff(t_abs: float, order: int) -> int:
    # |s + j| / (2 pi N) must stay well below 1 over the correction terms;
    # N ~ max(50, 2|t|) keeps the ratio under 1/(4 pi).
    return max(50, int(2 * t_abs) + 4 * order)


def zeta(s: complex, cutoff: int | None = None, order: int = 12) -> complex:
    """zeta(s) by Euler-Maclaurin; valid for sigma > 0 and also on sigma <= 0
    down to the first few trivial zeros. Raises PoleError at s = 1.

    Relative accuracy ~1e-13 for sigma >= 1/2, |t| <= 1e3 with defaults
    (validated against an independent high-precision evaluator in the tests).
    """
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has its pole at s = 1")
    if not (1 <= order <= _EM_ORDER_MAX):
        raise DomainError(f"order must be in 1..{_EM_ORDER_MAX}")
    N = cutoff if cutoff is not None else _em_cutoff(abs(s.imag), order)
    B = _bernoulli_even_floats()
    ns = np.arange(1, N)
    total = complex(np.sum(ns ** (-s)))
    total += 0.5 * N ** (-s) + N ** (1 - s) / (s - 1)
    for k in range(1, order + 1):
        rise = 1.0 + 0.0j
        for j in range(2 * k - 1):
            rise *= s + j
        total += B[k] / math.factorial(2 * k) * rise * N ** (1.0 - s - 2 * k)
    return total


def zeta_error_estimate(s: complex, cutoff: int | None = None, order: int = 12) -> float:
    """Magnitude estimate of the Euler-Maclaurin remainder: twice the first
    omitted correction term. Use to flag evaluations outside the validated
    region."""
    s = complex(s)
    N = cutoff if cutoff is not None else _em_cutoff(abs(s.imag), order)
    B = _bernoulli_even_floats()
    k = order + 1
    rise = 1.0
    for j in range(2 * k - 1):
        rise *= abs(s + j)
    return 2.0 * abs(B[k]) / math.factorial(2 * k) * rise * N ** (1.0 - s.real - 2 * k)


def _grid_cutoff(t_abs: float, order: int) -> int:
    # keeps |s + j|/(2 pi N) < ~0.16 over the correction terms: far more than
    # enough headroom at order 12, at half the cost of the scalar default
    return max(50, int(1.05 * t_abs) + 4 * order + 8)


def zeta_grid(sigma: float, ts: np.ndarray, order: int = 12) -> np.ndarray:
    """zeta(sigma + i t) for an ascending array of t >= 0.

    Bands the grid by |t| so the series cutoff follows the largest t of each
    band; within a band the n-sum is chunked to bound memory.
    """
    ts = np.asarray(ts, dtype=float)
    if len(ts) == 0:
        return np.empty(0, dtype=complex)
    if ts[0] < 0:
        raise DomainError("zeta_grid expects t >= 0 (use conjugation below the axis)")
    out = np.empty(len(ts), dtype=complex)
    B = _bernoulli_even_floats()
    lo = 0
    edges = [64.0]
    while edges[-1] < ts[-1]:
        edges.append(edges[-1] * 2)
    for edge in edges:
        hi = int(np.searchsorted(ts, edge, side="right")) if edge < ts[-1] else len(ts)
        if hi <= lo:
            continue
        band = ts[lo:hi]
        N = _grid_cutoff(float(band[-1]), order)
        s = sigma + 1j * band
        acc = np.zeros(len(band), dtype=complex)
        for n0 in range(1, N, 4096):
            ns = np.arange(n0, min(n0 + 4096, N), dtype=float)
            acc += np.exp(-np.multiply.outer(s, np.log(ns))).sum(axis=1)
        acc += 0.5 * np.exp(-s * math.log(N)) + np.exp((1 - s) * math.log(N)) / (s - 1)
        for k in range(1, order + 1):
            rise = np.ones(len(band), dtype=complex)
            for j in range(2 * k - 1):
                rise *= s + j
            acc += B[k] / math.factorial(2 * k) * rise * np.exp((1.0 - s - 2 * k) * math.log(N))
        out[lo:hi] = acc
        lo = hi
        if lo >= len(ts):
            break
    return out


# ---------------------------------------------------------------------------
# The Laurent tail of zeta at s = 1 and the fractional-part kernel.
# ---------------------------------------------------------------------------

# gamma_n: coefficients of zeta(s) - 1/(s-1) = sum (-1)^n gamma_n (s-1)^n / n!
_STIELTJES = (
    0.57721566490153286061,
    -0.072815845483676724861,
    -0.0096903631928723184845,
    0.0020538344203033458662,
    0.0023253700654673000575,
    0.00079332381730106270175,
    -0.00023876934543019960987,
    -0.00052728956705775104607,
    -0.0003521233538030395096,
    -0.000034394774418088048178,
    0.00020533281490906479468,
    0.00027018443954390352667,
)

_NEAR_ONE_RADIUS = 0.25


def zeta_minus_pole(s: complex) -> complex:
    """eta(s) = zeta(s) - 1/(s-1), evaluated stably near (and at) s = 1."""
    s = complex(s)
    if abs(s - 1) <= _NEAR_ONE_RADIUS:
        acc = 0.0j
        w = 1.0 + 0.0j
        for n, g in enumerate(_STIELTJES):
            acc += ((-1) ** n) * g * w / math.factorial(n)
            w *= s - 1
        return acc
    return zeta(s) - 1.0 / (s - 1)


def fractional_kernel(s: complex) -> complex:
    """The kernel 1/(s-1) - zeta(s)/s of the fractional-part contour formula.

    Identically (1 - eta(s))/s with eta = zeta - 1/(s-1), which is the form
    used near s = 1 (the kernel is analytic there; its value at 1 is
    1 - gamma). Raises PoleError at s = 0.
    """
    s = complex(s)
    if s == 0:
        raise PoleError("fractional kernel has a pole at s = 0")
    return (1.0 - zeta_minus_pole(s)) / s


def fractional_kernel_grid(sigma: float, ts: np.ndarray) -> np.ndarray:
    """fractional_kernel on an ascending grid t >= 0; nodes close to s = 1
    fall back to the stable series evaluation."""
    ts = np.asarray(ts, dtype=float)
    s = sigma + 1j * ts
    z = zeta_grid(sigma, ts)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1.0 / (s - 1.0) - z / s
    near = np.abs(s - 1.0) <= _NEAR_ONE_RADIUS
    for i in np.nonzero(near)[0]:
        out[i] = fractional_kernel(complex(s[i]))
    return out


# ---------------------------------------------------------------------------
# Branch-tracked log zeta and the prime zeta function.
# ---------------------------------------------------------------------------

# |zeta(s) - 1| <= zeta(sigma) - 1 < 1 for sigma >= 2.5, so the principal
# branch equals the Dirichlet-series branch on that half-plane.
_LOG_ANCHOR_SIGMA = 2.5


def log_zeta(s: complex) -> complex:
    """The Dirichlet-series branch of log zeta(s), for sigma > 1.

    Computed as the principal logarithm at an anchor of large real part
    (branch-safe there) and continued toward the target along the horizontal
    segment, unwrapping 2*pi jumps step by step.
    """
    s = complex(s)
    if s.real <= 1.0:
        raise DomainError(f"log zeta branch tracking needs sigma > 1, got {s.real}")
    if s.real >= _LOG_ANCHOR_SIGMA:
        return cmath.log(zeta(s))
    t = s.imag
    val = cmath.log(zeta(complex(_LOG_ANCHOR_SIGMA, t)))
    cur = _LOG_ANCHOR_SIGMA
    while cur > s.real:
        step = min(0.1, cur - s.real)
        cur -= step
        principal = cmath.log(zeta(complex(cur, t)))
        k = round((val.imag - principal.imag) / (2 * math.pi))
        val = principal + 2j * math.pi * k
    return val


def log_zeta_grid(sigma: float, ts: np.ndarray) -> np.ndarray:
    """Dirichlet-series branch of log zeta on an ascending grid t >= 0.

    Principal logs are unwrapped along the t direction and anchored at the
    first node by the scalar tracker. Valid for sigma > 1; the grid steps
    must be fine enough that the true argument moves by < pi between nodes
    (the quadrature grids used here are far finer).
    """
    ts = np.asarray(ts, dtype=float)
    vals = zeta_grid(sigma, ts)
    logs = np.log(vals)  # principal branch per node
    unwrapped = logs.real + 1j * np.unwrap(logs.imag)
    anchor = log_zeta(complex(sigma, ts[0])) if ts[0] > 0 else cmath.log(zeta(complex(sigma, 0.0)))
    shift = round((anchor.imag - unwrapped[0].imag) / (2 * math.pi))
    return unwrapped + 2j * math.pi * shift


_PRIME_ZETA_EPS = 1e-17


def prime_zeta(z: complex) -> complex:
    """P(z) = sum_p p^{-z} for Re z > 1, via Moebius inversion of log zeta."""
    z = complex(z)
    if z.real <= 1.0:
        raise DomainError(f"prime zeta needs Re z > 1, got {z.real}")
    total = 0.0j
    k = 1
    while 2.0 ** (-k * z.real) > _PRIME_ZETA_EPS and k < 128:
        mu = pr.mobius(k)
        if mu:
            total += mu / k * log_zeta(k * z)
        k += 1
    return total


def prime_zeta_grid(sigma: float, ts: np.ndarray) -> np.ndarray:
    """Grid version of prime_zeta along sigma + i t, ascending t >= 0."""
    ts = np.asarray(ts, dtype=float)
    if sigma <= 1.0:
        raise DomainError(f"prime zeta needs Re z > 1, got {sigma}")
    total = np.zeros(len(ts), dtype=complex)
    k = 1
    while 2.0 ** (-k * sigma) > _PRIME_ZETA_EPS and k < 128:
        mu = pr.mobius(k)
        if mu:
            total += mu / k * log_zeta_grid(k * sigma, k * ts)
        k += 1
    return total


# ---------------------------------------------------------------------------
# Euler factors and truncated products with tail bounds.
# ---------------------------------------------------------------------------

_SINGULAR_EPS = 1e-12


def twin_factor(p: int, s: complex) -> complex:
    """1 - 2/p^s."""
    return 1.0 - 2.0 * p ** (-complex(s))


def correction_factor(p: int, s: complex) -> complex:
    """1 + 1/(p^s (p^s - 2)); pole where p^s = 2."""
    ps = p ** complex(s)
    d = ps * (ps - 2.0)
    if abs(ps - 2.0) < _SINGULAR_EPS:
        raise SingularFactorError(f"correction factor at p={p} evaluated at its pole p^s = 2")
    return 1.0 + 1.0 / d


def combined_local_factor(p: int, s: complex) -> complex:
    """(1 - 2/p^s) * (1 + 1/(p^s(p^s-2))), evaluated factor by factor.

    Has a removable singularity at p^s = 2; see
    `combined_local_factor_stable` for the closed form without it.
    """
    return twin_factor(p, s) * correction_factor(p, s)


def combined_local_factor_stable(p: int, s: complex) -> complex:
    """(1 - 1/p^s)^2: the closed form of `combined_local_factor`."""
    return (1.0 - p ** (-complex(s))) ** 2


@dataclass(frozen=True)
class EulerProductSpec:
    """A truncated Euler product request.

    kind: "P_j"  prod_{p_j < p <= cutoff} (1 - 2/p^s)         (sigma > 1)
          "P1"   prod_{2   < p <= cutoff} (1 - 2/p^s)         (sigma > 1)
          "D"    prod_{2   < p <= cutoff} correction factor   (sigma > 1/2)
          "finite_factor" prod_{2 < p <= p_j} (1 - 2/p^s)     (exact, no tail)
    """

    kind: str
    cutoff: int
    p_j: int | None = None

    def __post_init__(self):
        if self.kind not in ("P_j", "P1", "D", "finite_factor"):
            raise DomainError(f"unknown Euler product kind {self.kind!r}")
        if self.kind in ("P_j", "finite_factor") and self.p_j is None:
            raise DomainError(f"kind {self.kind!r} needs p_j")


@dataclass(frozen=True)
class EulerProductValue:
    value: complex
    tail_bound: float  # absolute bound on |true - truncated|; 0 for finite products
    spec: EulerProductSpec


def _product_tail_bound(kind: str, cutoff: int, sigma: float, magnitude: float) -> float:
    """Crude integral majorant for the dropped factors beyond `cutoff`.

    For twin factors |g_p| = 2 p^{-sigma}: tail sum <= 2 P^{1-sigma}/(sigma-1).
    For correction factors |g_p| <= 2 p^{-2 sigma} (valid once p^sigma >= 4):
    tail sum <= 2 P^{1-2 sigma}/(2 sigma - 1). The product then deviates by at
    most |value| * (exp(2 * tailsum) - 1). Conservative by design: the
    integral counts all reals, not just primes.
    """
    if kind == "finite_factor":
        return 0.0
    if kind == "D":
        a = 2.0 * sigma
        if a <= 1.0:
            raise DomainError(f"correction product tail bound needs sigma > 1/2, got {sigma}")
    else:
        a = sigma
        if a <= 1.0:
            raise DomainError(f"twin product tail bound needs sigma > 1, got {sigma}")
    tail_sum = 2.0 * cutoff ** (1.0 - a) / (a - 1.0)
    return magnitude * (math.exp(2.0 * tail_sum) - 1.0)


def euler_product(spec: EulerProductSpec, s: complex) -> EulerProductValue:
    """Truncated product over primes <= cutoff, plus a rigorous tail bound."""
    s = complex(s)
    lo = {"P_j": spec.p_j, "P1": 2, "D": 2, "finite_factor": 2}[spec.kind]
    hi = spec.p_j if spec.kind == "finite_factor" else spec.cutoff
    value = 1.0 + 0.0j
    for p in pr.primes_up_to(max(hi, 2)):
        p = int(p)
        if p <= lo or p > hi:
            continue
        f = correction_factor(p, s) if spec.kind == "D" else twin_factor(p, s)
        if spec.kind != "D" and abs(f) < _SINGULAR_EPS:
            raise SingularFactorError(f"twin factor at p={p} vanishes (p^s = 2)")
        value *= f
    return EulerProductValue(
        value=value,
        tail_bound=_product_tail_bound(spec.kind, spec.cutoff, s.real, abs(value)),
        spec=spec,
    )


# ---------------------------------------------------------------------------
# Accelerated products through the prime zeta function.
# ---------------------------------------------------------------------------

_ACCEL_P0 = 61  # direct factors up to here; prime-zeta series beyond
_ACCEL_EPS = 1e-17


@lru_cache(maxsize=1)
def _accel_primes() -> tuple[int, ...]:
    return tuple(int(p) for p in pr.primes_up_to(_ACCEL_P0).primes)


def _next_prime_after_p0() -> int:
    return 67


def _power_sum_correction(s: complex, m: int) -> complex:
    """sum_{p <= P0} p^{-m s} (all primes, including 2)."""
    return sum(p ** (-m * s) for p in _accel_primes())


def _twin_log_series(s: complex, start_m: int = 1) -> complex:
    """- sum_{m>=start_m} (2^m/m) [P(ms) - sum_{p<=P0} p^{-ms}]  (all p > P0)."""
    s = complex(s)
    q = _next_prime_after_p0()
    r = 2.0 * q ** (-s.real)
    if r >= 1.0:
        raise DomainError(f"twin log series diverges at sigma = {s.real}")
    total = 0.0j
    m = start_m
    while True:
        bound = 3.0 * (2.0 * q ** (-s.real)) ** m / (m * (1.0 - r))
        if bound < _ACCEL_EPS or m > 400:
            break
        total -= 2.0**m / m * (prime_zeta(m * s) - _power_sum_correction(s, m))
        m += 1
    return total


def odd_twin_product(s: complex) -> complex:
    """prod_{p > 2} (1 - 2/p^s) to near machine accuracy, for sigma > 1."""
    s = complex(s)
    if s.real <= 1.0:
        raise DomainError(f"odd twin product needs sigma > 1, got {s.real}")
    lg = sum(cmath.log(twin_factor(p, s)) for p in _accel_primes() if p > 2)
    lg += _twin_log_series(s)
    return cmath.exp(lg)


def twin_product_tail(s: complex, p_j: int) -> complex:
    """prod_{p > p_j} (1 - 2/p^s), sigma > 1 (the rough-squarefree series)."""
    s = complex(s)
    if s.real <= 1.0:
        raise DomainError(f"twin product needs sigma > 1, got {s.real}")
    if p_j < 2 or p_j > _ACCEL_P0 or not pr.is_prime(p_j):
        raise DomainError(f"p_j must be a prime <= {_ACCEL_P0}, got {p_j}")
    lg = sum(cmath.log(twin_factor(p, s)) for p in _accel_primes() if p > p_j)
    lg += _twin_log_series(s)
    return cmath.exp(lg)


def rough_abs_product(sigma: float, p_j: int) -> float:
    """prod_{p > p_j} (1 + 2 p^{-sigma}) for real sigma > 1: the absolute
    Dirichlet value sum 2^nu(n) n^{-sigma} over p_j-rough squarefree n."""
    if sigma <= 1.0:
        raise DomainError(f"rough absolute product needs sigma > 1, got {sigma}")
    if p_j > _ACCEL_P0:
        raise DomainError(f"p_j must be <= {_ACCEL_P0}, got {p_j}")
    lg = sum(math.log(1.0 + 2.0 * p ** (-sigma)) for p in _accel_primes() if p > p_j)
    q = _next_prime_after_p0()
    r = 2.0 * q ** (-sigma)
    m = 1
    while True:
        bound = 3.0 * (2.0 * q ** (-sigma)) ** m / (m * (1.0 - r))
        if bound < _ACCEL_EPS or m > 400:
            break
        corr = sum(p ** (-m * float(sigma)) for p in _accel_primes())
        lg += (-1.0) ** (m + 1) * 2.0**m / m * (prime_zeta(complex(m * sigma)).real - corr)
        m += 1
    return math.exp(lg)


def correction_product(s: complex) -> complex:
    """D(s) = prod_{p>2} (1 + 1/(p^s(p^s-2))) to near machine accuracy.

    Valid for sigma > log 2 / log 67 ~ 0.165 via the prime-zeta series (the
    practical constraint is sigma > 1/2 where the product converges).
    """
    s = complex(s)
    if s.real <= 0.5:
        raise DomainError(f"correction product needs sigma > 1/2, got {s.real}")
    lg = sum(cmath.log(correction_factor(p, s)) for p in _accel_primes() if p > 2)
    q = _next_prime_after_p0()
    r = 2.0 * q ** (-s.real)
    m = 2
    while True:
        bound = 3.0 * (2.0 * q ** (-s.real)) ** m / (m * (1.0 - r))
        if bound < _ACCEL_EPS or m > 400:
            break
        coef = (2.0**m - 2.0) / m
        lg += coef * (prime_zeta(m * s) - _power_sum_correction(s, m))
        m += 1
    return cmath.exp(lg)


def correction_product_grid(sigma: float, ts: np.ndarray, coeff_limit: int = 10**6) -> np.ndarray:
    """D(sigma + i t) on an ascending grid t >= 0.

    For sigma >= 1.05 the sparse coefficient series over odd powerful numbers
    is summed up to coeff_limit. The dropped tail is a Dirichlet series
    supported on n > coeff_limit, so a contour transform built from this grid
    still targets the exact partial sums up to coeff_limit (the perturbation
    cannot reach coefficients that low); pointwise the relative deviation is
    roughly 3 sqrt(coeff_limit)^(1-2 sigma) / ((2 sigma - 1) log sqrt(coeff_limit)).
    Below sigma = 1.05 the prime-zeta log series is evaluated gridwise instead.
    """
    ts = np.asarray(ts, dtype=float)
    if sigma <= 0.5:
        raise DomainError(f"correction product needs sigma > 1/2, got {sigma}")
    if sigma >= 1.05:
        ns, avals = powerful_terms(coeff_limit)
        out = np.ones(len(ts), dtype=complex)
        s = sigma + 1j * ts
        for n0 in range(0, len(ns), 512):
            chunk_n = ns[n0 : n0 + 512].astype(float)
            chunk_a = avals[n0 : n0 + 512].astype(float)
            out += (chunk_a * np.exp(-np.multiply.outer(s, np.log(chunk_n)))).sum(axis=1)
        return out
    lg = np.zeros(len(ts), dtype=complex)
    s = sigma + 1j * ts
    for p in _accel_primes():
        if p > 2:
            ps = np.exp(s * math.log(p))
            lg += np.log(1.0 + 1.0 / (ps * (ps - 2.0)))
    q = _next_prime_after_p0()
    r = 2.0 * q ** (-sigma)
    m = 2
    while True:
        bound = 3.0 * (2.0 * q ** (-sigma)) ** m / (m * (1.0 - r))
        if bound < 1e-14:
            break
        coef = (2.0**m - 2.0) / m
        corr = sum(np.exp(-m * s * math.log(p)) for p in _accel_primes())
        lg += coef * (prime_zeta_grid(m * sigma, m * ts) - corr)
        m += 1
    return np.exp(lg)


# ---------------------------------------------------------------------------
# Coefficients of the correction product.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirichletSeriesTable:
    """Dense coefficient table a_1..a_N_max of a Dirichlet series."""

    N_max: int
    coeffs: np.ndarray  # index n holds a_n; index 0 unused


@lru_cache(maxsize=8)
def powerful_terms(limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Sparse nonzero coefficients of the correction product up to `limit`.

    Support: odd n > 1 whose prime exponents are all >= 2; the coefficient is
    prod_p 2^(e_p - 2). Returned as ascending (n, a_n) arrays, n = 1 excluded.
    """
    plist = [int(p) for p in pr.primes_up_to(math.isqrt(limit) + 1).primes if p > 2]
    ns: list[int] = []
    avals: list[int] = []

    def dfs(value: int, a: int, start: int) -> None:
        for i in range(start, len(plist)):
            p = plist[i]
            pe = p * p
            if value * pe > limit:
                break
            e = 2
            while value * pe <= limit:
                dfs_value = value * pe
                coeff = a * (1 << (e - 2))
                ns.append(dfs_value)
                avals.append(coeff)
                dfs(dfs_value, coeff, i + 1)
                pe *= p
                e += 1

    dfs(1, 1, 0)
    order = np.argsort(np.array(ns, dtype=np.int64), kind="stable")
    return (
        np.array(ns, dtype=np.int64)[order],
        np.array(avals, dtype=np.int64)[order],
    )


def correction_coefficients(n_max: int) -> DirichletSeriesTable:
    """Dense a_1..a_n_max of the correction product: a_1 = 1; a_n = 0 for even
    n or any exponent-1 prime; otherwise prod 2^(e_p - 2)."""
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    coeffs = np.zeros(n_max + 1, dtype=np.int64)
    coeffs[1] = 1
    ns, avals = powerful_terms(n_max)
    coeffs[ns] = avals
    return DirichletSeriesTable(N_max=n_max, coeffs=coeffs)


def exponent_shortcut(n: int) -> int:
    """An additive-exponent shortcut formula for the correction coefficients.

    Splits the exponent pattern of n into even exponents 2(nu_i + 1) and odd
    exponents 2*mu_i + 3 and returns 2^(2 r_e + 2 r_o - 2 rbar_e - 2 rbar_o)
    with r_e = sum nu_i, r_o = sum (mu_i + 3), rbar_e = #{nu_i > 0},
    rbar_o = #{mu_i > 0}. Kept for comparison only: it does **not** reproduce
    the direct local-factor expansion (already n = p^4 gives 2^2 directly but
    1 from the shortcut); `exponent_shortcut_mismatches` reports the
    difference, which is deliberately not papered over.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n == 1:
        return 1
    r_e = r_o = rbar_e = rbar_o = 0
    for p, e in pr.factorize(n):
        if p == 2 or e < 2:
            return 0
        if e % 2 == 0:
            nu_i = e // 2 - 1
            r_e += nu_i
            rbar_e += 1 if nu_i > 0 else 0
        else:
            mu_i = (e - 3) // 2
            r_o += mu_i + 3
            rbar_o += 1 if mu_i > 0 else 0
    expo = 2 * r_e + 2 * r_o - 2 * rbar_e - 2 * rbar_o
    return 2**expo if expo >= 0 else 0


def exponent_shortcut_mismatches(n_max: int) -> list[tuple[int, int, int]]:
    """(n, direct coefficient, shortcut value) wherever the two disagree."""
    table = correction_coefficients(n_max)
    out = []
    for n in range(1, n_max + 1):
        direct = int(table.coeffs[n])
        if direct == 0 and n % 2 == 0:
            continue  # shortcut agrees trivially off the odd support
        short = exponent_shortcut(n)
        if short != direct:
            out.append((n, direct, short))
    return out


# ---------------------------------------------------------------------------
# The squarefree-divisor majorant zeta^2 / zeta(2s).
# ---------------------------------------------------------------------------

def two_nu_coefficients(n_max: int) -> np.ndarray:
    """2^nu(n) for n = 1..n_max (index 0 unused)."""
    cache = pr.ArithmeticFunctionCache.build(n_max)
    out = np.zeros(n_max + 1, dtype=np.int64)
    out[1:] = 2 ** cache.nu[1:].astype(np.int64)
    return out


def majorant_coefficient_check(n_max: int) -> int:
    """Verify that the Dirichlet coefficients of zeta(s)^2 / zeta(2s) equal
    2^nu(n) for all n <= n_max: c(n) = sum_{m^2 | n} mu(m) d(n/m^2).

    Returns the number of n checked; raises on the first mismatch.
    """
    d = np.zeros(n_max + 1, dtype=np.int64)
    for a in range(1, n_max + 1):
        d[a::a] += 1
    c = np.zeros(n_max + 1, dtype=np.int64)
    m = 1
    while m * m <= n_max:
        mu = pr.mobius(m)
        if mu:
            sq = m * m
            ks = np.arange(1, n_max // sq + 1)
            c[ks * sq] += mu * d[ks]
        m += 1
    expected = two_nu_coefficients(n_max)
    bad = np.nonzero(c[1:] != expected[1:])[0]
    if len(bad):
        n = int(bad[0]) + 1
        raise AssertionError(f"majorant coefficient mismatch at n={n}: {c[n]} != {expected[n]}")
    return n_max


@dataclass(frozen=True)
class MajorantResidual:
    s: complex
    residual: float
    tail_bound: float
    n_terms: int


def majorant_residual(s: complex, n_terms: int = 10**6) -> MajorantResidual:
    """|zeta(s)^2/zeta(2s) - sum_{n<=N} 2^nu(n) n^{-s}|, with the coefficient
    tail bounded by the same series at sigma: zeta(sigma)^2/zeta(2 sigma)
    minus its partial sum."""
    s = complex(s)
    if s.real <= 1.0:
        raise DomainError(f"majorant residual needs sigma > 1, got {s.real}")
    coeff = two_nu_coefficients(n_terms).astype(float)
    ns = np.arange(1, n_terms + 1, dtype=float)
    partial = complex((coeff[1:] * np.exp(-complex(s) * np.log(ns))).sum())
    closed = zeta(s) ** 2 / zeta(2 * s)
    sig = s.real
    partial_abs = float((coeff[1:] * ns ** (-sig)).sum())
    closed_abs = (zeta(complex(sig)) ** 2 / zeta(complex(2 * sig))).real
    return MajorantResidual(
        s=s,
        residual=abs(closed - partial),
        tail_bound=max(closed_abs - partial_abs, 0.0),
        n_terms=n_terms,
    )


# ---------------------------------------------------------------------------
# The product identity (verification entry point).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductIdentityResiduals:
    s: complex
    identity_residual: float      # |P1 * zeta^2 * D * (1 - 2^-s)^2 - 1|
    series_vs_product: float      # |coefficient partial sum - truncated product|
    series_tail_bound: float
    product_tail_bound: float
    product_cutoff: int
    series_n_max: int


def product_identity_residuals(s: complex, cutoff: int = 10**5, n_max: int = 10**5) -> ProductIdentityResiduals:
    """Check the factorization identity and the coefficient expansion of the
    correction product at one point s with sigma > 1.

    The identity residual uses the accelerated (prime-zeta) product values;
    the series-versus-product comparison uses the truncated product with its
    crude tail bound against the partial coefficient sum with the exact
    positive-term tail at sigma.
    """
    s = complex(s)
    if s.real <= 1.0:
        raise DomainError(f"identity check needs sigma > 1, got {s.real}")
    p1 = odd_twin_product(s)
    dval = correction_product(s)
    z = zeta(s)
    identity_residual = abs(p1 * z * z * dval * (1 - 2.0 ** (-s)) ** 2 - 1.0)

    truncated = euler_product(EulerProductSpec(kind="D", cutoff=cutoff), s)
    ns, avals = powerful_terms(n_max)
    series = 1.0 + complex((avals * np.exp(-s * np.log(ns.astype(float)))).sum()) if len(ns) else 1.0 + 0j
    # positive-term tail at real sigma bounds the complex tail; the tiny
    # inflation keeps the bound a majorant despite its own float evaluation
    sig = s.real
    series_abs = 1.0 + float((avals * ns.astype(float) ** (-sig)).sum()) if len(ns) else 1.0
    series_tail = max(correction_product(complex(sig)).real - series_abs, 0.0) * (1 + 1e-6) + 1e-14
    return ProductIdentityResiduals(
        s=s,
        identity_residual=identity_residual,
        series_vs_product=abs(series - truncated.value),
        series_tail_bound=series_tail,
        product_tail_bound=truncated.tail_bound,
        product_cutoff=cutoff,
        series_n_max=n_max,
    )


# ---------------------------------------------------------------------------
# The counting integrand.
# ---------------------------------------------------------------------------

def finite_twin_product(s: complex, p_j: int) -> complex:
    """prod_{2 < p <= p_j} (1 - 2/p^s), exact finite product."""
    out = 1.0 + 0.0j
    for p in pr.primes_up_to(p_j):
        if p > 2:
            out *= twin_factor(int(p), s)
    return out


@dataclass(frozen=True)
class IntegrandValue:
    value: complex
    denom_abs: float  # |s * zeta * finite product * D| (conditioning witness)


def counting_integrand(s: complex, ctx) -> IntegrandValue:
    """The contour integrand x^s (1-2^{-s})^{-2} / (s zeta(s) F(s) D(s)) with
    F the finite twin product up to p_j and x from the sieve context.

    x^s is exp(s log x) with the exact log of the positive integer x.
    """
    s = complex(s)
    if ctx.x <= 0:
        raise DomainError(f"context p_j={ctx.p_j} has x={ctx.x} <= 0")
    z = zeta(s)
    f = finite_twin_product(s, ctx.p_j)
    d = correction_product(s)
    denom = s * z * f * d
    if denom == 0:
        raise SingularFactorError("counting integrand denominator vanished")
    xs = cmath.exp(s * math.log(ctx.x))
    val = xs * (1.0 - 2.0 ** (-s)) ** (-2) / denom
    return IntegrandValue(value=val, denom_abs=abs(denom))


def counting_integrand_grid(
    sigma: float, ts: np.ndarray, ctx, coeff_limit: int = 10**6
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid version over ascending t >= 0.

    coeff_limit controls the correction-product series (see
    correction_product_grid); keep it well above the transform window 10x.
    Returns (values, |zeta| per node, |denominator| per node).
    """
    ts = np.asarray(ts, dtype=float)
    if ctx.x <= 0:
        raise DomainError(f"context p_j={ctx.p_j} has x={ctx.x} <= 0")
    s = sigma + 1j * ts
    z = zeta_grid(sigma, ts)
    f = np.ones(len(ts), dtype=complex)
    for p in pr.primes_up_to(ctx.p_j):
        if p > 2:
            f *= 1.0 - 2.0 * np.exp(-s * math.log(int(p)))
    d = correction_product_grid(sigma, ts, coeff_limit=coeff_limit)
    denom = s * z * f * d
    vals = np.exp(s * math.log(ctx.x)) * (1.0 - np.exp(-s * math.log(2.0))) ** (-2.0) / denom
    return vals, np.abs(z), np.abs(denom)


# ---------------------------------------------------------------------------
# Pole cancellation at s_p = log 2 / log p.
# ---------------------------------------------------------------------------

def pole_cancellation_point(p: int) -> float:
    """s_p = log 2 / log p: the real point where p^s = 2."""
    return math.log(2) / math.log(p)


@dataclass(frozen=True)
class PoleCancellationLimits:
    p: int
    s_p: float
    left_limit: float
    right_limit: float
    stable_value: float


def pole_cancellation_limits(p: int = 3, eps0: float = 1e-3, levels: int = 6) -> PoleCancellationLimits:
    """Two-sided real-axis limits of the combined local factor at s_p.

    The naive factor-by-factor product has a 0 * inf form at s_p; approaching
    along the real axis from either side with Richardson (Neville)
    extrapolation in eps must give the same finite limit, matching the closed
    form (1 - 1/p^{s_p})^2 = (1 - 1/2)^2 = 1/4, since p^{s_p} = 2.
    """
    s_p = pole_cancellation_point(p)

    def extrapolate(side: int) -> float:
        xs = [eps0 / 2**k for k in range(levels)]
        ys = [combined_local_factor(p, s_p + side * e).real for e in xs]
        # Neville tableau toward eps -> 0
        for j in range(1, levels):
            for i in range(levels - j):
                ys[i] = ys[i + 1] + (ys[i + 1] - ys[i]) * xs[i + 1] / (xs[i] - xs[i + 1])
        return ys[0]

    return PoleCancellationLimits(
        p=p,
        s_p=s_p,
        left_limit=extrapolate(-1),
        right_limit=extrapolate(+1),
        stable_value=combined_local_factor_stable(p, s_p).real,
    )


# ---------------------------------------------------------------------------
# Empirical probe of 1/|zeta| along the zero-free-region contour.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InverseZetaSample:
    t: float
    sigma: float
    inv_abs_zeta: float
    ratio_to_log: float  # |1/zeta| / log(|t| + 2)
    flagged: bool


def inverse_zeta_probe(t_samples, c_trial: float, flag_threshold: float = 1e-3) -> list[InverseZetaSample]:
    """Sample |1/zeta(sigma + it)| on sigma = 1 - c/log(|t|+2).

    An empirical magnitude survey, not a bound proof; samples where |zeta|
    drops below flag_threshold are flagged rather than trusted.
    """
    if c_trial <= 0:
        raise DomainError(f"c_trial must be positive, got {c_trial}")
    out = []
    for t in t_samples:
        sig = 1.0 - c_trial / math.log(abs(t) + 2.0)
        z = zeta(complex(sig, t))
        az = abs(z)
        out.append(
            InverseZetaSample(
                t=float(t),
                sigma=sig,
                inv_abs_zeta=1.0 / az if az > 0 else math.inf,
                ratio_to_log=(1.0 / az) / math.log(abs(t) + 2.0) if az > 0 else math.inf,
                flagged=az < flag_threshold,
            )
        )
    return out


def write_sample_table(path: str, rows) -> None:
    """CSV with header (sigma, t, re, im, abs, denom_min); 17 significant
    digits so values reparse exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sigma", "t", "re", "im", "abs", "denom_min"])
        for sigma, t, val, denom in rows:
            w.writerow(
                [f"{sigma:.17g}", f"{t:.17g}", f"{val.real:.17g}", f"{val.imag:.17g}",
                 f"{abs(val):.17g}", f"{denom:.17g}"]
            )
