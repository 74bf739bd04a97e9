"""Local factors A_j(n, q) and the truncated singular series and products.

For j = 2 (prime plus prime square)

    A_2(n, q) = mu(q)/phi(q)^2 * sum_{(a,q)=1} S(q, a) e(-a n / q)

and for j = 3 (three prime squares)

    A_3(n, q) = 1/phi(q)^3 * sum_{(a,q)=1} S(q, a)^3 e(-a n / q),

where S(q, a) is the quadratic sum over reduced residues.  The whole table
n -> A_j(n, q), n mod q, is produced at once: S(q, .) is the discrete Fourier
transform of the counts of x^2 mod q over reduced x, and the outer sum over a
is a second transform.  Both are exact finite sums, evaluated with FFTs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .arith import base_primes, euler_phi, factorize, mobius
from .classes import ClassPredicate, in_class

TABLE_CACHE_MAX_Q = 4096
AGREEMENT_TOL = 1e-9


class ConsistencyError(ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""


@dataclass(frozen=True)
class LocalFactor:
    j: int
    n: int
    q: int
    value: complex
    method: Literal["direct", "multiplicative"]

    @property
    def real(self) -> float:
        return self.value.real


@dataclass(frozen=True)
class SeriesValue:
    j: int
    n: int
    cutoff: float
    value: float
    mode: Literal["truncated_series", "euler_product"]


def _check_j(j: int) -> None:
    if j not in (2, 3):
        raise ValueError(f"j must be 2 or 3, got {j}")


def _power(j: int) -> int:
    # one squared variable for p + p'^2, three for sums of three squares
    return 1 if j == 2 else 3


def gauss_sum(q: int, a: int) -> complex:
    """S(q, a): sum of e(a x^2 / q) over reduced residues x mod q."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")
    x = np.arange(1, q + 1, dtype=np.int64)
    x = x[np.gcd(x, q) == 1]
    r = (a % q) * (x * x % q) % q
    return complex(np.exp(2j * np.pi * r / q).sum())


_tables: dict[tuple[int, int], np.ndarray] = {}


def _cacheable(q: int) -> bool:
    # small moduli and prime powers are the ones reused by series and products
    if q <= 256:
        return True
    return q <= TABLE_CACHE_MAX_Q and len(factorize(q).factors) == 1


def _compute_table(j: int, q: int) -> np.ndarray:
    if j == 2 and mobius(q) == 0:
        return np.zeros(q, dtype=complex)
    residues = np.arange(q, dtype=np.int64)
    units = np.gcd(residues, q) == 1
    x = residues[units]
    counts = np.bincount(x * x % q, minlength=q)
    s = q * np.fft.ifft(counts)  # s[a] = S(q, a)
    terms = np.where(units, s ** _power(j), 0)
    phi = euler_phi(q)
    coef = mobius(q) / phi**2 if j == 2 else 1.0 / phi**3
    return coef * np.fft.fft(terms)  # index n -> sum_a terms[a] e(-a n / q)


def local_table(j: int, q: int) -> np.ndarray:
    """A_j(n, q) for n = 0, ..., q - 1 by the direct double sum."""
    _check_j(j)
    if q < 1:
        raise ValueError("q must be >= 1")
    if not _cacheable(q):
        return _compute_table(j, q)
    key = (j, q)
    table = _tables.get(key)
    if table is None:
        table = _compute_table(j, q)
        table.setflags(write=False)
        _tables[key] = table
    return table


def _multiplicative_values(j: int, ns: np.ndarray, q: int) -> np.ndarray:
    out = np.ones(ns.shape, dtype=complex)
    for p, e in factorize(q).factors:
        pk = p**e
        out *= local_table(j, pk)[ns % pk]
    return out


def local_factor_values(j: int, ns: Iterable[int], q: int, method: str = "direct") -> np.ndarray:
    """Vectorised A_j(n, q) over an array of n."""
    _check_j(j)
    ns = np.asarray(ns, dtype=np.int64)
    if method == "direct":
        return local_table(j, q)[ns % q]
    if method == "multiplicative":
        return _multiplicative_values(j, ns, q)
    raise ValueError(f"unknown method {method!r}")


def local_factor(j: int, n: int, q: int) -> LocalFactor:
    """A_j(n, q), checked against its multiplicative assembly over prime powers.

    Raises ConsistencyError when the two routes differ by more than 1e-9.
    """
    _check_j(j)
    if q < 1:
        raise ValueError("q must be >= 1")
    direct = complex(local_table(j, q)[n % q])
    assembled = complex(_multiplicative_values(j, np.array([n]), q)[0])
    if abs(direct - assembled) > AGREEMENT_TOL:
        raise ConsistencyError(
            f"A_{j}({n}, {q}): direct {direct} vs multiplicative {assembled}"
        )
    return LocalFactor(j, n, q, direct, "direct")


def local_factor_literal(j: int, n: int, q: int) -> complex:
    """Textbook O(q^2) evaluation of A_j(n, q); slow, used as a reference."""
    _check_j(j)
    total = 0j
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        s = sum(
            cmath.exp(2j * math.pi * (a * x * x % q) / q)
            for x in range(1, q + 1)
            if math.gcd(x, q) == 1
        )
        total += s ** _power(j) * cmath.exp(-2j * math.pi * (a * n % q) / q)
    phi = euler_phi(q)
    return total * (mobius(q) / phi**2 if j == 2 else 1 / phi**3)


# ------------------------------------------------------------------ series


def singular_series_values(j: int, ns: Iterable[int], P: float) -> np.ndarray:
    """Truncated series sum_{q <= P} A_j(n, q) for each n (real part)."""
    _check_j(j)
    if P < 1:
        raise ValueError("P must be >= 1")
    ns = np.asarray(ns, dtype=np.int64)
    total = np.zeros(ns.shape, dtype=float)
    for q in range(1, math.floor(P) + 1):
        if j == 2 and mobius(q) == 0:
            continue
        total += local_table(j, q)[ns % q].real
    return total


def singular_series(j: int, n: int, P: float) -> SeriesValue:
    value = float(singular_series_values(j, [n], P)[0])
    return SeriesValue(j, n, P, value, "truncated_series")


def _euler_factor(j: int, ns: np.ndarray, p: int) -> np.ndarray:
    # mu(p^k) = 0 kills A_2 beyond k = 1; A_3(n, p^k) vanishes for p >= 3, k >= 2
    # and for p = 2, k >= 4
    top = 3 if (j == 3 and p == 2) else 1
    factor = np.ones(ns.shape, dtype=float)
    for k in range(1, top + 1):
        factor += local_table(j, p**k)[ns % p**k].real
    if j == 3 and p <= 50:
        tail = local_table(j, p ** (top + 1))[ns % p ** (top + 1)]
        if np.max(np.abs(tail), initial=0.0) > 1e-10:
            raise ConsistencyError(f"A_3(n, {p}^{top + 1}) does not vanish")
    return factor


def singular_product_values(j: int, ns: Iterable[int], Q: float) -> np.ndarray:
    """Finite Euler product over p <= Q; empty (Q < 2) gives 1.0."""
    _check_j(j)
    ns = np.asarray(ns, dtype=np.int64)
    out = np.ones(ns.shape, dtype=float)
    if Q < 2:
        return out
    for p in base_primes(math.floor(Q)).tolist():
        out *= _euler_factor(j, ns, p)
    return out


def singular_product(j: int, n: int, Q: float) -> SeriesValue:
    value = float(singular_product_values(j, [n], Q)[0])
    return SeriesValue(j, n, Q, value, "euler_product")


def discrepancy_statistic(j: int, x: int, y: int, P: float, Q: float) -> float:
    """Mean square gap between the truncated series and the Euler product.

    (1/y) * sum over x < n <= x + y, n in the admissible class, of
    (S_j(n, P) - P_j(n, Q))^2.
    """
    _check_j(j)
    if not 2 <= P <= Q:
        raise ValueError("need 2 <= P <= Q")
    if y <= 0:
        return 0.0
    cls = ClassPredicate.H2 if j == 2 else ClassPredicate.H3
    ns = np.array([n for n in range(x + 1, x + y + 1) if in_class(cls, n)], dtype=np.int64)
    if ns.size == 0:
        return 0.0
    gap = singular_series_values(j, ns, P) - singular_product_values(j, ns, Q)
    return float(np.sum(gap * gap) / y)
