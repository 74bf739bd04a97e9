"""Local factors are checked against an exact rational oracle built from
Ramanujan sums, which shares no code with the FFT evaluation:

    sum over reduced a of e(a m / q) = c_q(m) = sum_{d | (q, m)} mu(q/d) d,

so  A_2(n, q) = mu(q)/phi(q)^2 * sum_{y reduced} c_q(y^2 - n)
and A_3(n, q) = 1/phi(q)^3 * sum_{x, y, z reduced} c_q(x^2 + y^2 + z^2 - n).
"""

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primesq import singular
from primesq.arith import euler_phi, legendre_symbol, mobius, primes_up_to
from primesq.classes import ClassPredicate, class_members
from primesq.singular import (
    ConsistencyError,
    discrepancy_statistic,
    gauss_sum,
    local_factor,
    local_factor_literal,
    local_factor_values,
    singular_product,
    singular_series,
)


@lru_cache(maxsize=None)
def ramanujan(q: int, m: int) -> int:
    g = math.gcd(q, m % q) if m % q else q
    return sum(mobius(q // d) * d for d in range(1, g + 1) if g % d == 0 and q % d == 0)


@lru_cache(maxsize=None)
def _square_dist(q: int, j: int) -> tuple:
    units = [x for x in range(1, q + 1) if math.gcd(x, q) == 1]
    dist = [0] * q
    for x in units:
        dist[x * x % q] += 1
    out = [1] + [0] * (q - 1)
    for _ in range(j):
        nxt = [0] * q
        for r, c in enumerate(out):
            if c:
                for s, d in enumerate(dist):
                    if d:
                        nxt[(r + s) % q] += c * d
        out = nxt
    return tuple(out)


def exact_A(j: int, n: int, q: int) -> Fraction:
    k = 1 if j == 2 else 3
    dist = _square_dist(q, k)
    total = sum(c * ramanujan(q, m - n) for m, c in enumerate(dist) if c)
    phi = euler_phi(q)
    return Fraction(mobius(q) * total, phi**2) if j == 2 else Fraction(total, phi**3)


# ------------------------------------------------------------------ Gauss sums


def test_gauss_sum_examples():
    assert gauss_sum(1, 1) == pytest.approx(1)
    assert gauss_sum(2, 1) == pytest.approx(-1)
    assert abs(gauss_sum(4, 1) - 2j) < 1e-12


def test_gauss_sum_domain():
    with pytest.raises(ValueError):
        gauss_sum(6, 3)


def test_gauss_sum_prime_modulus():
    # over reduced residues S(p, a) = (a|p) G - 1 with |G| = sqrt(p)
    for p in (5, 13, 101):
        for a in (1, 2, 3):
            s = gauss_sum(p, a) + 1
            assert abs(abs(s) - math.sqrt(p)) < 1e-9


# ------------------------------------------------------------------ local factors


def test_local_factor_examples():
    assert local_factor(2, 10, 2).value == pytest.approx(1)
    assert local_factor(2, 7, 3).value == pytest.approx(-1)
    for p in (3, 5, 7, 11, 101):
        assert abs(local_factor(2, 3 * p, p).value - 1 / (p - 1)) < 1e-9


@pytest.mark.parametrize("j", [2, 3])
def test_tables_match_exact_oracle(j):
    for q in list(range(1, 41)) + [48, 60, 64, 81, 105, 120]:
        table = singular.local_table(j, q)
        for n in range(q):
            assert abs(table[n] - float(exact_A(j, n, q))) < 1e-10, (j, n, q)


@pytest.mark.parametrize("j", [2, 3])
def test_literal_reference_matches(j):
    for q in (1, 2, 3, 4, 6, 8, 9, 12, 15):
        for n in range(q):
            assert abs(local_factor_literal(j, n, q) - local_table_value(j, n, q)) < 1e-9


def local_table_value(j, n, q):
    return complex(singular.local_table(j, q)[n % q])


def test_values_are_real():
    for j in (2, 3):
        for q in range(1, 300):
            vals = singular.local_table(j, q)
            assert np.all(np.abs(vals.imag) <= 1e-9 * (1 + np.abs(vals)))


def test_multiplicativity_sample():
    ns = np.arange(10**6, 10**6 + 120)
    for j in (2, 3):
        for q in range(1, 1500):
            a = local_factor_values(j, ns, q, "direct")
            b = local_factor_values(j, ns, q, "multiplicative")
            assert np.max(np.abs(a - b)) <= 1e-9


@given(st.integers(1, 10**4), st.integers(-10**9, 10**9), st.sampled_from([2, 3]))
@settings(max_examples=60, deadline=None)
def test_local_factor_self_consistent(q, n, j):
    lf = local_factor(j, n, q)
    assert lf.method == "direct"
    assert abs(lf.value.imag) <= 1e-9 * (1 + abs(lf.value))


def test_mismatch_raises_consistency_error(monkeypatch):
    real = singular._multiplicative_values
    monkeypatch.setattr(singular, "_multiplicative_values", lambda j, ns, q: real(j, ns, q) + 1e-6)
    with pytest.raises(ConsistencyError):
        local_factor(2, 10, 15)


def test_unknown_method_and_j():
    with pytest.raises(ValueError):
        local_factor_values(2, [1], 5, "fast")
    with pytest.raises(ValueError):
        local_factor(4, 1, 5)


# ------------------------------------------------------------------ structural facts


def test_vanishing_at_higher_prime_powers():
    ns = np.arange(0, 720)
    for p in (3, 5, 7, 11, 13):
        for k in (2, 3):
            assert np.max(np.abs(local_factor_values(3, ns, p**k))) <= 1e-10
    for k in (4, 5):
        assert np.max(np.abs(local_factor_values(3, ns, 2**k))) <= 1e-10


def test_positivity_h2():
    rng = np.random.default_rng(7)
    ns = np.array([n for n in rng.integers(10, 10**9, 4000).tolist() if ClassPredicate.H2(n)][:1000])
    assert ns.size == 1000
    for p in primes_up_to(1000).tolist():
        assert np.all(1 + local_factor_values(2, ns, p).real > 0)


def test_positivity_h3():
    rng = np.random.default_rng(8)
    ns = np.array([n for n in rng.integers(10, 10**9, 40000).tolist() if ClassPredicate.H3(n)][:1000])
    assert ns.size == 1000
    for k in (1, 2, 3):
        assert np.all(local_factor_values(3, ns, 2**k).real >= -1e-10)
    for p in primes_up_to(1000).tolist()[1:]:
        assert np.all(1 + local_factor_values(3, ns, p).real > 0)


def test_local_formula_for_prime_moduli():
    # closed form: A_2(n, p) = -(1 + p (n|p)) / (p - 1)^2 for p not dividing n
    for p in primes_up_to(1000).tolist()[1:]:
        ns = np.arange(1, p)
        chi = np.array([legendre_symbol(int(n), p) for n in ns])
        vals = local_factor_values(2, ns, p).real
        assert np.max(np.abs(vals + (1 + p * chi) / (p - 1) ** 2)) < 1e-9
        assert abs(local_factor_values(2, [p], p)[0] - 1 / (p - 1)) < 1e-9
        # leading term is -(n|p)/p; the O(p^-2) constant 6 is attained at p = 3
        assert np.max(np.abs(vals + chi / p)) * p * p <= 6 + 1e-9


def test_local_formula_sign():
    # the leading term enters with a minus sign: for a residue n mod p,
    # A_2 < 0, and for a non-residue A_2 > 0
    p = 101
    res = next(n for n in range(2, p) if legendre_symbol(n, p) == 1)
    non = next(n for n in range(2, p) if legendre_symbol(n, p) == -1)
    assert local_factor(2, res, p).real < 0 < local_factor(2, non, p).real
    assert abs(local_factor(2, res, p).real - 1 / p) > 1 / p


def test_decay_constant():
    # recorded calibration: max |A_j(n, q)| q / (log log(q + 3))^3 over q <= 3000
    # is 28.7 for j = 2 and 346.2 for j = 3, attained at small q
    ns = np.arange(10**6, 10**6 + 120)
    bound = {2: 30.0, 3: 350.0}
    for j in (2, 3):
        for q in range(1, 3001):
            v = float(np.max(np.abs(local_factor_values(j, ns, q))))
            assert v * q / math.log(math.log(q + 3)) ** 3 <= bound[j]


# ------------------------------------------------------------------ series and products


def test_series_examples():
    assert singular_series(2, 12345, 1).value == 1.0
    oracle20 = sum(exact_A(2, 20, q) for q in range(1, 11))
    assert singular_series(2, 20, 10).value == pytest.approx(float(oracle20), abs=1e-12)
    oracle27 = 1 + exact_A(3, 27, 2) + exact_A(3, 27, 3) + exact_A(3, 27, 4)
    assert singular_series(3, 27, 4).value == pytest.approx(float(oracle27), abs=1e-12)


def test_product_examples():
    assert singular_product(2, 10, 2).value == pytest.approx(2.0)
    assert singular_product(2, 11, 2).value == pytest.approx(0.0, abs=1e-12)
    assert singular_product(2, 11, 1.5).value == 1.0
    assert singular_product(3, 27, 0).value == 1.0


def test_product_matches_exact_oracle():
    for n in (20, 1000002, 3 * 5 * 7 * 11 * 2):
        expected = Fraction(1)
        for p in (2, 3, 5, 7, 11, 13):
            expected *= 1 + exact_A(2, n, p)
        assert singular_product(2, n, 13).value == pytest.approx(float(expected), rel=1e-12)
    for n in (27, 3 + 24 * 1001):
        expected = Fraction(1)
        for p in (2, 3, 5, 7):
            top = 3 if p == 2 else 1
            expected *= 1 + sum(exact_A(3, n, p**k) for k in range(1, top + 1))
        assert singular_product(3, n, 7).value == pytest.approx(float(expected), rel=1e-12)


def test_product_band():
    # calibration: over 3000 sampled n in H2 and Q in {10, 100, 1000},
    # value * log Q >= 3.36 and value / log Q <= 1.90
    rng = np.random.default_rng(1)
    for Q in (10, 100, 1000):
        ns = np.array([n for n in rng.integers(10**4, 10**7, 3000).tolist() if ClassPredicate.H2(n)])
        vals = singular.singular_product_values(2, ns, Q)
        assert np.all(vals > 0)
        assert np.all(vals >= 3 / math.log(Q))
        assert np.all(vals <= 2 * math.log(Q))


def test_euler_product_tracks_series():
    ns = np.array(class_members(ClassPredicate.H2, 10**6, 10**6 + 300))
    s = singular.singular_series_values(2, ns, 2000)
    p = singular.singular_product_values(2, ns, 2000)
    assert np.median(np.abs(s - p)) < 0.05


# ------------------------------------------------------------------ discrepancy


def oracle_discrepancy(x, y, P, Q):
    total = Fraction(0)
    for n in class_members(ClassPredicate.H2, x, x + y):
        series = sum(exact_A(2, n, q) for q in range(1, int(P) + 1))
        prod = Fraction(1)
        for p in primes_up_to(int(Q)).tolist():
            prod *= 1 + exact_A(2, n, p)
        total += (series - prod) ** 2
    return total / y


def test_discrepancy_value():
    value = discrepancy_statistic(2, 10**4, 100, 10, 10)
    assert value == pytest.approx(float(oracle_discrepancy(10**4, 100, 10, 10)), rel=1e-12)
    assert value == pytest.approx(0.09879002700617281, rel=1e-9)


def test_discrepancy_empty_window():
    assert discrepancy_statistic(2, 10**4, 0, 10, 10) == 0.0


def test_discrepancy_decreases_in_P():
    vals = [discrepancy_statistic(2, 10**4, 100, P, 1000) for P in (10, 30, 100, 300, 1000)]
    assert vals[-1] < vals[0] / 10
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_discrepancy_precondition():
    with pytest.raises(ValueError):
        discrepancy_statistic(2, 10**4, 10, 20, 10)


def test_discrepancy_j3_runs():
    assert discrepancy_statistic(3, 10**4, 500, 20, 100) >= 0
