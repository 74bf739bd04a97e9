"""Prime sieving over windows and the elementary arithmetic functions.

Windows are sieved with an odd-only bitmap against a shared cache of base
primes, so a window at offset ~1e12 costs O(length + sqrt(hi)) rather than a
full sieve from zero.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import reduce

import numpy as np

DEFAULT_WINDOW_BUDGET = 200_000_000
MAX_FACTOR_INPUT = 10**14


class ResourceLimitError(RuntimeError):
    """A request exceeds a configured memory or size budget."""


# ------------------------------------------------------------------ base primes

_base_lock = threading.Lock()
_base_limit = 0
_base_primes = np.zeros(0, dtype=np.int64)


def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def base_primes(limit: int) -> np.ndarray:
    """All primes <= limit, served from a cache that only ever grows."""
    global _base_limit, _base_primes
    if limit > _base_limit:
        with _base_lock:
            if limit > _base_limit:
                new_limit = max(limit, 2 * _base_limit, 1 << 16)
                _base_primes = _simple_sieve(new_limit)
                _base_primes.setflags(write=False)
                _base_limit = new_limit
    primes = _base_primes
    return primes[: np.searchsorted(primes, limit, side="right")]


def primes_up_to(limit: int) -> np.ndarray:
    if limit <= 10_000_000:
        return base_primes(limit)
    return primes_in(0, limit + 1)


def _odd_sieve(a: int, b: int) -> tuple[int, np.ndarray]:
    """Primality of the odd integers in [a, b).

    Returns (first_odd, bits) with bits[i] describing first_odd + 2*i.
    """
    first = a | 1
    if first >= b:
        return first, np.zeros(0, dtype=bool)
    count = (b - first + 1) // 2
    bits = np.ones(count, dtype=bool)
    for p in base_primes(math.isqrt(b - 1))[1:]:
        p = int(p)
        start = max(p * p, -(-first // p) * p)
        if start % 2 == 0:
            start += p
        if start >= b:
            continue
        bits[(start - first) // 2 :: p] = False
    if first == 1:
        bits[0] = False
    return first, bits


def primes_in(a: int, b: int) -> np.ndarray:
    """Sorted primes in the half-open range [a, b)."""
    a = max(a, 0)
    if b <= a:
        return np.zeros(0, dtype=np.int64)
    first, bits = _odd_sieve(a, b)
    odd = first + 2 * np.flatnonzero(bits).astype(np.int64)
    if a <= 2 < b:
        return np.concatenate([np.array([2], dtype=np.int64), odd])
    return odd


def prime_mask(a: int, b: int) -> np.ndarray:
    """Dense boolean primality over [a, b): mask[i] is True iff a + i is prime."""
    a = max(a, 0)
    mask = np.zeros(max(b - a, 0), dtype=bool)
    if b > a:
        mask[primes_in(a, b) - a] = True
    return mask


# ------------------------------------------------------------------ windows


@dataclass(frozen=True)
class PrimeWindow:
    """Exact primality over the integers in (lo, hi], stored for odd m only."""

    lo: int
    hi: int
    first_odd: int
    bits: np.ndarray

    def is_prime(self, m: int) -> bool:
        if not self.lo < m <= self.hi:
            raise ValueError(f"{m} outside window ({self.lo}, {self.hi}]")
        if m % 2 == 0:
            return m == 2
        return bool(self.bits[(m - self.first_odd) // 2])

    __contains__ = is_prime

    def lookup(self, ms) -> np.ndarray:
        """Vectorised prime indicator (0/1) for an array of integers in the window."""
        ms = np.asarray(ms, dtype=np.int64)
        if ms.size and (ms.min() <= self.lo or ms.max() > self.hi):
            raise ValueError("lookup outside window")
        out = np.zeros(ms.shape, dtype=np.int64)
        odd = (ms % 2) == 1
        out[odd] = self.bits[(ms[odd] - self.first_odd) // 2]
        out[ms == 2] = 1
        return out

    def primes(self) -> np.ndarray:
        odd = self.first_odd + 2 * np.flatnonzero(self.bits).astype(np.int64)
        if self.lo < 2 <= self.hi:
            odd = np.concatenate([[2], odd])
        return odd

    def count(self) -> int:
        return int(self.bits.sum()) + int(self.lo < 2 <= self.hi)


def sieve_range(lo: int, hi: int, budget: int = DEFAULT_WINDOW_BUDGET) -> PrimeWindow:
    """Sieve the window (lo, hi].

    Raises ValueError unless 2 <= lo < hi, and ResourceLimitError when the
    window is longer than `budget` integers.
    """
    lo, hi = int(lo), int(hi)
    if lo < 2:
        raise ValueError(f"lo must be >= 2, got {lo}")
    if hi <= lo:
        raise ValueError(f"need lo < hi, got ({lo}, {hi}]")
    if hi - lo > budget:
        raise ResourceLimitError(f"window length {hi - lo} exceeds budget {budget}")
    first, bits = _odd_sieve(lo + 1, hi + 1)
    bits.setflags(write=False)
    return PrimeWindow(lo, hi, first, bits)


# ------------------------------------------------------------------ factoring


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def value(self) -> int:
        return reduce(lambda acc, pe: acc * pe[0] ** pe[1], self.factors, 1)


def factorize(n: int) -> Factorization:
    """Trial division against the cached base primes."""
    n = int(n)
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    if n > MAX_FACTOR_INPUT:
        raise ValueError(f"{n} exceeds the supported factoring range")
    factors = []
    rest = n
    if n > 1:
        bp = base_primes(math.isqrt(n))
        divisors = bp[(n % bp) == 0] if bp.size else bp
        for p in divisors.tolist():
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            factors.append((p, e))
        if rest > 1:
            factors.append((rest, 1))
    return Factorization(n, tuple(factors))


def smallest_prime_factors(limit: int) -> np.ndarray:
    """spf[m] for 0 <= m <= limit (spf[0] = spf[1] = 0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in base_primes(math.isqrt(limit)).tolist():
        block = spf[p * p :: p]
        block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    spf[:2] = 0
    return spf


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    if n < 4:
        return True
    if n > MAX_FACTOR_INPUT:
        raise ValueError(f"{n} exceeds the supported primality range")
    bp = base_primes(math.isqrt(n))
    return not bool(np.any(n % bp == 0))


def mobius(q: int) -> int:
    if q < 1:
        raise ValueError("mobius needs q >= 1")
    f = factorize(q).factors
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(q: int) -> int:
    if q < 1:
        raise ValueError("euler_phi needs q >= 1")
    phi = 1
    for p, e in factorize(q).factors:
        phi *= (p - 1) * p ** (e - 1)
    return phi


def legendre_symbol(n: int, p: int) -> int:
    """Quadratic character of n modulo the odd prime p, by Euler's criterion."""
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    r = pow(n % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def rough_indicator(m: int, z: float) -> int:
    """1 iff every prime factor of m is >= z (so m = 1 gives 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    f = factorize(m).factors
    return int(not f or f[0][0] >= z)


def smooth_indicator(m: int, z: float) -> int:
    """1 iff every prime factor of m is <= z (so m = 1 gives 1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    f = factorize(m).factors
    return int(not f or f[-1][0] <= z)


def smooth_count(x: int, z: float) -> int:
    """Number of m <= x with no prime factor above z."""
    x = int(x)
    if not 2 <= z <= x:
        raise ValueError(f"smooth_count needs 2 <= z <= x, got x={x}, z={z}")
    zi = math.floor(z)
    if zi * zi >= x:
        # every m <= x has at most one prime factor above sqrt(x) >= z
        big = primes_in(zi + 1, x + 1)
        return x - int(np.sum(x // big))
    primes = base_primes(zi).tolist()

    def walk(limit: int, k: int) -> int:
        # numbers <= limit built from primes[k:], including 1
        total = 1
        for i in range(k, len(primes)):
            p = primes[i]
            if p > limit:
                break
            pk = p
            while pk <= limit:
                total += walk(limit // pk, i + 1)
                pk *= p
        return total

    return walk(x, 0)
