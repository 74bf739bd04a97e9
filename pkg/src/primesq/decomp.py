"""Parameter bundle and the sieve weights on the short interval I2.

All weights are integer-valued functions of m built from Phi(k, z), the
indicator that every prime factor of k is >= z.  For m in I2 the relevant
cofactors k are m divided by a few of its own primes, so each value is read
off the factorisation of m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .arith import is_prime, smallest_prime_factors

GAMMA_NAMES = ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5")
BETA_NAMES = ("beta1", "beta2", "beta3", "beta4", "beta5", "beta6")
WEIGHT_NAMES = (
    ("lambda0",) + GAMMA_NAMES + BETA_NAMES
    + ("lambda2_minus", "lambda2_plus", "lambda0_high", "lambda0_rest")
)


@dataclass(frozen=True)
class IntervalConfig:
    """Every scale parameter, derived from (X, theta1, theta2, eps, B).

    Interval endpoints are reals; ``i1_range``/``i2_range`` give the integers
    inside the half-open intervals.  ``flags`` lists the ways the
    configuration is degenerate at this scale (it is never rejected for them).
    """

    X: int
    theta1: float
    theta2: float
    eps: float
    B: float
    L: float
    Y: float
    H: float
    P: float
    Q0: float
    Q: float
    z0: float
    U: float
    V: float
    W: float
    z1_split: float
    z1_beta: float
    I1: tuple[float, float]
    I2: tuple[float, float]
    flags: tuple[str, ...] = field(default=())

    @property
    def y4(self) -> float:
        return self.Y**0.25

    @property
    def i1_range(self) -> range:
        return range(math.ceil(self.I1[0]), math.ceil(self.I1[1]))

    @property
    def i2_range(self) -> range:
        return range(math.ceil(self.I2[0]), math.ceil(self.I2[1]))

    def z_of(self, p: int) -> float:
        """min(z0, Y^(1/2) p^-2)."""
        return min(self.z0, math.sqrt(self.Y) / (p * p))

    def in_i2(self, m: int) -> bool:
        return m in self.i2_range

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["I1"], d["I2"] = list(self.I1), list(self.I2)
        d["flags"] = list(self.flags)
        return d

    @cached_property
    def _spf(self) -> np.ndarray:
        return smallest_prime_factors(max(self.i2_range.stop, 2))


def _near_prime(c: float) -> bool:
    r = round(c)
    return abs(c - r) < 1e-9 and r >= 2 and is_prime(r)


def derive_config(X: int, theta1: float, theta2: float, eps: float = 0.0, B: float = 1.0) -> IntervalConfig:
    if X <= 0 or theta1 <= 0 or theta2 <= 0:
        raise ValueError("X and the exponents must be positive")
    if X < 1000:
        raise ValueError(f"X must be >= 1000, got {X}")
    if not (theta1 < 1 and theta2 < 1):
        raise ValueError("theta1 and theta2 must lie in (0, 1)")
    if B < 0 or eps < 0:
        raise ValueError("B and eps must be >= 0")
    L = math.log(X)
    Y = X**theta1
    H = Y**theta2
    P = L**B
    z0 = Y**0.25 / P**2
    V = H * Y ** (-0.5 - eps / 2)
    W = math.sqrt(Y) / V
    cfg = IntervalConfig(
        X=int(X), theta1=theta1, theta2=theta2, eps=eps, B=B, L=L, Y=Y, H=H, P=P,
        Q0=Y / P**3, Q=H / P, z0=z0, U=Y ** (eps / 2), V=V, W=W,
        z1_split=Y ** (1 / 6 + eps / 2), z1_beta=max(V, math.sqrt(z0)),
        I1=(X - Y, float(X)), I2=(0.5 * math.sqrt(Y), math.sqrt(Y)),
    )
    flags = []
    lo2, hi2 = cfg.I2
    if len(cfg.i2_range) == 0:
        flags.append("I2_empty")
    if z0 < 2:
        flags.append("z0_below_2")  # lambda0 is identically 1
    if V >= z0:
        flags.append("V_ge_z0")
    if z0 * z0 >= lo2:
        # products p1 p2 <= z0^2 can reach I2: truncation z(p2) and the
        # lambda0 split stop being exact identities
        flags.append("z0_squared_reaches_I2")
    if z0**3 < hi2:
        flags.append("z0_cubed_below_I2")  # lambda0 support has 3-factor m
    if cfg.z1_split >= z0:
        flags.append("split_z1_ge_z0")
    if any(_near_prime(c) for c in (z0, V, cfg.z1_split, cfg.z1_beta)):
        flags.append("prime_cutoff")
    return replace(cfg, flags=tuple(flags))


# ------------------------------------------------------------------ weights


class _Factored:
    """Factorisation of m with Phi evaluated on m / (product of some of its primes)."""

    __slots__ = ("m", "primes", "exps")

    def __init__(self, m: int, spf: np.ndarray):
        primes, exps = [], []
        k = m
        while k > 1:
            p = int(spf[k])
            e = 0
            while k % p == 0:
                k //= p
                e += 1
            primes.append(p)
            exps.append(e)
        self.m = m
        self.primes = primes
        self.exps = exps

    def phi(self, z: float, removed: tuple[int, ...] = ()) -> int:
        for p, e in zip(self.primes, self.exps):
            if e - (p in removed) > 0:
                return int(p >= z)
        return 1


def _factored(m: int, cfg: IntervalConfig) -> _Factored:
    if not cfg.in_i2(m):
        raise ValueError(f"m = {m} outside I2 = [{cfg.I2[0]:g}, {cfg.I2[1]:g})")
    return _Factored(m, cfg._spf)


def _lambda0(f: _Factored, cfg: IntervalConfig) -> int:
    return f.phi(cfg.z0)


def _gammas(f: _Factored, cfg: IntervalConfig) -> tuple[int, int, int, int, int]:
    V, z0, W = cfg.V, cfg.z0, cfg.W
    g1 = f.phi(V)
    g2 = sum(f.phi(V, (p,)) for p in f.primes if V < p <= z0)
    g4 = g5 = 0
    for p2, p1 in combinations(f.primes, 2):  # p2 < p1
        if V < p2 and p1 <= cfg.z_of(p2):
            term = f.phi(p2, (p1, p2))
            if p1 * p2 < W:
                g4 += term
            else:
                g5 += term
    return g1, g2, g4 + g5, g4, g5


def _betas(f: _Factored, cfg: IntervalConfig) -> tuple[int, ...]:
    V, z0, z1 = cfg.V, cfg.z0, cfg.z1_beta
    low = [p for p in f.primes if V < p <= z1]
    b1 = f.phi(V)
    b2 = sum(f.phi(p, (p,)) for p in low)
    b3 = sum(f.phi(p, (p,)) for p in f.primes if z1 < p <= z0)
    b4 = sum(f.phi(V, (p,)) for p in low)
    b5 = sum(f.phi(V, pair) for pair in combinations(low, 2))
    b6 = sum(f.phi(trip[0], trip) for trip in combinations(low, 3))
    return b1, b2, b3, b4, b5, b6


class Lambda0Split(NamedTuple):
    lambda0_high: int
    lambda0_rest: int
    valid: bool


def _lambda0_split(f: _Factored, cfg: IntervalConfig) -> Lambda0Split:
    z1, z0 = cfg.z1_split, cfg.z0
    mids = [p for p in f.primes if z1 < p <= z0]
    rem = sum(f.phi(z1, (p,)) for p in mids)
    # replacing Phi(m/p, p) by Phi(m/p, z1) is only legitimate when they agree
    valid = all(f.phi(p, (p,)) == f.phi(z1, (p,)) for p in mids)
    return Lambda0Split(f.phi(z1), rem, valid)


def lambda0(m: int, cfg: IntervalConfig) -> int:
    return _lambda0(_factored(m, cfg), cfg)


def gamma_decomposition(m: int, cfg: IntervalConfig) -> tuple[int, int, int, int, int]:
    """(gamma1, ..., gamma5); gamma3 = gamma4 + gamma5 split at p1 p2 < W."""
    return _gammas(_factored(m, cfg), cfg)


def beta_decomposition(m: int, cfg: IntervalConfig) -> tuple[int, int, int, int, int, int]:
    return _betas(_factored(m, cfg), cfg)


def lambda2_minus(m: int, cfg: IntervalConfig) -> int:
    g1, g2, _, _, g5 = gamma_decomposition(m, cfg)
    return g1 - g2 + g5


def lambda2_plus(m: int, cfg: IntervalConfig) -> int:
    b1, _, _, b4, b5, _ = beta_decomposition(m, cfg)
    return b1 - b4 + b5


def lambda0_split(m: int, cfg: IntervalConfig) -> Lambda0Split:
    """(lambda0', lambda0'', valid) for the split at z1 = Y^(1/6 + eps/2)."""
    return _lambda0_split(_factored(m, cfg), cfg)


def weights_at(m: int, cfg: IntervalConfig) -> dict[str, int]:
    """Every weight at m in one pass."""
    f = _factored(m, cfg)
    g = _gammas(f, cfg)
    b = _betas(f, cfg)
    sp = _lambda0_split(f, cfg)
    out = {"lambda0": _lambda0(f, cfg)}
    out.update(zip(GAMMA_NAMES, g))
    out.update(zip(BETA_NAMES, b))
    out["lambda2_minus"] = g[0] - g[1] + g[4]
    out["lambda2_plus"] = b[0] - b[3] + b[4]
    out["lambda0_high"], out["lambda0_rest"] = sp.lambda0_high, sp.lambda0_rest
    out["split_valid"] = int(sp.valid)
    return out


@dataclass(frozen=True)
class WeightTable:
    """An integer weight tabulated densely over I2."""

    name: str
    lo: int
    values: np.ndarray

    @property
    def hi(self) -> int:
        return self.lo + len(self.values)

    def __getitem__(self, m: int) -> int:
        if not self.lo <= m < self.hi:
            raise ValueError(f"{m} outside table support")
        return int(self.values[m - self.lo])

    def lookup(self, ms) -> np.ndarray:
        ms = np.asarray(ms, dtype=np.int64)
        if ms.size and (ms.min() < self.lo or ms.max() >= self.hi):
            raise ValueError("lookup outside table support")
        return self.values[ms - self.lo]

    def summary(self) -> dict:
        v = self.values
        return {
            "support_size": int(np.count_nonzero(v)),
            "sum": int(v.sum()),
            "min": int(v.min()) if v.size else 0,
            "max": int(v.max()) if v.size else 0,
        }


def build_weight_tables(cfg: IntervalConfig) -> dict[str, WeightTable]:
    r = cfg.i2_range
    names = WEIGHT_NAMES + ("split_valid",)
    cols = {name: np.zeros(len(r), dtype=np.int64) for name in names}
    for i, m in enumerate(r):
        for name, v in weights_at(m, cfg).items():
            cols[name][i] = v
    out = {}
    for name, arr in cols.items():
        arr.setflags(write=False)
        out[name] = WeightTable(name, r.start, arr)
    return out


def identity_violations(tables: dict[str, WeightTable]) -> dict[str, int]:
    """Count of m in I2 where each exact identity fails."""
    t = {k: v.values for k, v in tables.items()}
    lam0 = t["lambda0"]
    return {
        "gamma": int(np.count_nonzero(t["gamma1"] - t["gamma2"] + t["gamma3"] != lam0)),
        "gamma_split": int(np.count_nonzero(t["gamma4"] + t["gamma5"] != t["gamma3"])),
        "beta": int(np.count_nonzero(t["beta1"] - t["beta2"] - t["beta3"] != lam0)),
        "beta2": int(np.count_nonzero(t["beta4"] - t["beta5"] + t["beta6"] != t["beta2"])),
        "lambda0_split": int(np.count_nonzero(t["lambda0_high"] - t["lambda0_rest"] != lam0)),
        "sandwich": int(np.count_nonzero((t["lambda2_minus"] > lam0) | (lam0 > t["lambda2_plus"]))),
    }
