"""Representation counts R2, R0, R3, R4 and the exceptional-set scanner.

Two modes are supported.  ``paper_intervals`` restricts the linear variable
to I1 = [X - Y, X) and the square root variable to I2 = [Y^(1/2)/2, Y^(1/2))
of an IntervalConfig.  ``unrestricted`` allows every prime.
"""

from __future__ import annotations

import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Union

import numpy as np

from .arith import ResourceLimitError, is_prime, prime_mask, primes_in, primes_up_to
from .classes import ClassPredicate, class_members, in_class
from .decomp import IntervalConfig, WeightTable
from .singular import singular_series_values

Mode = Literal["paper_intervals", "unrestricted"]
MODES = ("paper_intervals", "unrestricted")
DENSE_LIMIT = 50_000_000
MAIN_TERM_MIN_P = 100.0
WORKERS_ENV = "PRIMESQ_WORKERS"


# ------------------------------------------------------------------ weights


@dataclass(frozen=True)
class DenseWeight:
    """Integer weight on the consecutive integers lo, lo + 1, ..."""

    lo: int
    values: np.ndarray

    @property
    def hi(self) -> int:
        return self.lo + len(self.values)


WeightLike = Union[str, DenseWeight, WeightTable]


def _resolve(weight: WeightLike, rng: range) -> np.ndarray:
    """Dense values of `weight` over exactly the integers in `rng`."""
    if isinstance(weight, str):
        if weight == "prime":
            return prime_mask(rng.start, rng.stop).astype(np.int64)
        if weight == "ones":
            return np.ones(len(rng), dtype=np.int64)
        raise ValueError(f"unknown weight {weight!r}")
    lo, vals = weight.lo, np.asarray(weight.values)
    if len(rng) == 0:
        return np.zeros(0, dtype=np.int64)
    if rng.start < lo or rng.stop > lo + len(vals):
        raise ValueError("weight table does not cover the interval")
    return vals[rng.start - lo : rng.stop - lo].astype(np.int64)


def _window_count(n: int, r1: range, v1: np.ndarray, m2: np.ndarray, v2: np.ndarray) -> int:
    if m2.size == 0 or len(r1) == 0:
        return 0
    m1 = n - m2 * m2
    ok = (m1 >= r1.start) & (m1 < r1.stop)
    if not ok.any():
        return 0
    return int(np.dot(v1[m1[ok] - r1.start], v2[ok]))


def _ranges(cfg: Optional[IntervalConfig], i1: Optional[range], i2: Optional[range]) -> tuple[range, range]:
    if i1 is None or i2 is None:
        if cfg is None:
            raise ValueError("pass a config or both explicit ranges")
        i1 = cfg.i1_range if i1 is None else i1
        i2 = cfg.i2_range if i2 is None else i2
    return i1, i2


def count_R_generic(
    n: int,
    weight1: WeightLike,
    weight2: WeightLike,
    cfg: Optional[IntervalConfig] = None,
    *,
    i1: Optional[range] = None,
    i2: Optional[range] = None,
) -> int:
    """Sum of weight1(m1) * weight2(m2) over m1 + m2^2 = n, m1 in I1, m2 in I2.

    Weights are "prime", "ones", or a table covering the interval.
    """
    r1, r2 = _ranges(cfg, i1, i2)
    v2 = _resolve(weight2, r2)
    m2 = np.arange(r2.start, r2.stop, dtype=np.int64)
    nz = v2 != 0
    m2, v2 = m2[nz], v2[nz]
    if m2.size == 0:
        return 0
    # only the slice of I1 that n - m2^2 can reach is materialised
    a = max(r1.start, n - int(m2[-1]) ** 2)
    b = min(r1.stop, n - int(m2[0]) ** 2 + 1)
    if b <= a:
        return 0
    sub = range(a, b)
    return _window_count(n, sub, _resolve(weight1, sub), m2, v2)


class _PrimeLookup:
    """Dense prime indicator over [lo, hi) with range checks."""

    def __init__(self, lo: int, hi: int):
        lo = max(lo, 0)
        if hi - lo > DENSE_LIMIT:
            raise ResourceLimitError(f"dense prime table over {hi - lo} integers exceeds {DENSE_LIMIT}")
        self.lo, self.hi = lo, max(hi, lo)
        self.mask = prime_mask(self.lo, self.hi)

    def __call__(self, ms: np.ndarray) -> np.ndarray:
        out = np.zeros(ms.shape, dtype=bool)
        ok = (ms >= self.lo) & (ms < self.hi)
        out[ok] = self.mask[ms[ok] - self.lo]
        return out


def _check_mode(mode: str, cfg: Optional[IntervalConfig]) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "paper_intervals" and cfg is None:
        raise ValueError("paper_intervals mode needs a config")


# ------------------------------------------------------------------ p + p'^2


def _r2_unrestricted(n: int, lookup: Optional[_PrimeLookup] = None) -> int:
    if n < 6:
        return 0
    ps = primes_up_to(math.isqrt(n - 2))
    m1 = n - ps * ps
    if lookup is None:
        return sum(is_prime(int(v)) for v in m1)
    return int(np.count_nonzero(lookup(m1)))


def count_R2(n: int, cfg: Optional[IntervalConfig] = None, mode: Mode = "paper_intervals") -> int:
    """Number of prime pairs with p1 + p2^2 = n."""
    _check_mode(mode, cfg)
    if mode == "unrestricted":
        return _r2_unrestricted(n)
    return count_R_generic(n, "prime", "prime", cfg)


def _r2_pairs(n: int, cfg: Optional[IntervalConfig], mode: Mode) -> tuple[np.ndarray, np.ndarray]:
    if mode == "unrestricted":
        m2 = np.arange(2, math.isqrt(max(n - 2, 0)) + 1, dtype=np.int64)
        return n - m2 * m2, m2
    r1, r2 = cfg.i1_range, cfg.i2_range
    m2 = np.arange(r2.start, r2.stop, dtype=np.int64)
    m1 = n - m2 * m2
    ok = (m1 >= r1.start) & (m1 < r1.stop)
    return m1[ok], m2[ok]


def _r2_paper_many(ns: np.ndarray, cfg: IntervalConfig) -> list[int]:
    r1, r2 = cfg.i1_range, cfg.i2_range
    p2 = primes_in(r2.start, r2.stop)
    if p2.size == 0:
        return [0] * len(ns)
    sq = p2 * p2
    lookup = _PrimeLookup(max(r1.start, int(ns[0]) - int(sq[-1])),
                          min(r1.stop, int(ns[-1]) - int(sq[0]) + 1))
    out = []
    for n in ns.tolist():
        m1 = n - sq
        ok = (m1 >= r1.start) & (m1 < r1.stop)
        out.append(int(np.count_nonzero(lookup(m1[ok]))))
    return out


def weight_r2(n: int, cfg: Optional[IntervalConfig] = None, mode: Mode = "paper_intervals") -> float:
    """Sum of 1/(log m1 log m2) over integer solutions of m1 + m2^2 = n.

    In unrestricted mode every m1, m2 >= 2 is allowed.
    """
    _check_mode(mode, cfg)
    m1, m2 = _r2_pairs(n, cfg, mode)
    if m1.size == 0:
        return 0.0
    return math.fsum((1.0 / (np.log(m1.astype(float)) * np.log(m2.astype(float)))).tolist())


def r0_moduli(cfg: IntervalConfig) -> np.ndarray:
    """Sorted m = p2 p3 in I2 with z0 < p2 <= Y^(1/4) and p2 <= p3."""
    r2 = cfg.i2_range
    out = []
    for p2 in primes_in(math.floor(cfg.z0) + 1, math.floor(cfg.y4) + 1).tolist():
        if p2 <= cfg.z0 or p2 > cfg.y4:
            continue
        lo3 = max(p2, -(-r2.start // p2))
        hi3 = (r2.stop - 1) // p2
        if hi3 >= lo3:
            out.extend((p2 * primes_in(lo3, hi3 + 1)).tolist())
    return np.array(sorted(out), dtype=np.int64)


def count_R0(n: int, cfg: IntervalConfig) -> int:
    """Prime triples with p1 + (p2 p3)^2 = n, p1 in I1 and the constraints on p2, p3."""
    ms = r0_moduli(cfg)
    if ms.size == 0:
        return 0
    r1 = cfg.i1_range
    m1 = n - ms * ms
    m1 = m1[(m1 >= r1.start) & (m1 < r1.stop)]
    return sum(is_prime(int(v)) for v in m1)


# ------------------------------------------------------------------ prime squares


class _PairSums:
    """Counts of ordered prime pairs (p1, p2) with p1^2 + p2^2 = s, for s <= limit."""

    def __init__(self, limit: int):
        ps = primes_up_to(math.isqrt(max(limit, 0)))
        sq = ps * ps
        s = (sq[:, None] + sq[None, :]).ravel()
        s = s[s <= limit]
        self.values, self.counts = np.unique(s, return_counts=True)

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.int64)
        if self.values.size == 0:
            return np.zeros(s.shape, dtype=np.int64)
        idx = np.searchsorted(self.values, s)
        idx = np.minimum(idx, self.values.size - 1)
        return np.where(self.values[idx] == s, self.counts[idx], 0)


def count_R3(n: int, cfg: Optional[IntervalConfig] = None, mode: Mode = "paper_intervals",
             pairs: Optional[_PairSums] = None) -> int:
    """Ordered prime triples with p1^2 + p2^2 + p3^2 = n.

    paper_intervals mode additionally asks p1^2 + p2^2 in I1 and p3 in I2.
    """
    _check_mode(mode, cfg)
    if n < 12:
        return 0
    pairs = pairs or _PairSums(n)
    if mode == "unrestricted":
        p3 = primes_up_to(math.isqrt(n - 8))
        return int(pairs(n - p3 * p3).sum())
    r1, r2 = cfg.i1_range, cfg.i2_range
    p3 = primes_in(r2.start, r2.stop)
    s = n - p3 * p3
    s = s[(s >= r1.start) & (s < r1.stop)]
    return int(pairs(s).sum())


def count_R4(n: int, pairs: Optional[_PairSums] = None) -> int:
    """Ordered prime quadruples with p1^2 + ... + p4^2 = n (no interval constraints)."""
    if n < 16:
        return 0
    pairs = pairs or _PairSums(n)
    s = pairs.values[pairs.values <= n - 8]
    return int(np.dot(pairs.counts[: s.size], pairs(n - s)))


# ------------------------------------------------------------------ scanning


@dataclass(frozen=True)
class ScanRecord:
    n: int
    count: int
    predicted: Optional[float]
    ratio: Optional[float]


@dataclass(frozen=True)
class ExceptionReport:
    X: int
    H: int
    cls: ClassPredicate
    mode: str
    records: tuple[ScanRecord, ...]
    exceptional: tuple[int, ...]
    summary: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_json(self, header: Optional[dict] = None) -> str:
        from .serialize import dumps

        return dumps(self.as_dict(header))

    def to_csv(self, header: Optional[dict] = None) -> str:
        from .serialize import csv_text

        rows = [(r.n, r.count, r.predicted, r.ratio) for r in self.records]
        return csv_text(["n", "count", "predicted", "ratio"], rows, header)

    def as_dict(self, header: Optional[dict] = None) -> dict:
        d = {}
        if header:
            d["header"] = header
        d.update(
            X=self.X, H=self.H, cls=self.cls.value, mode=self.mode, params=self.params,
            summary=self.summary, exceptional=list(self.exceptional),
            records=[
                {"n": r.n, "count": r.count, "predicted": r.predicted, "ratio": r.ratio}
                for r in self.records
            ],
        )
        return d


def main_term_cutoff(X: int, cfg: Optional[IntervalConfig]) -> float:
    P = cfg.P if cfg is not None else math.log(X)
    return max(P, MAIN_TERM_MIN_P)


def _scan_shard(args) -> list[ScanRecord]:
    ns, cls, mode, cfg, series_cut = args
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return []
    top = int(ns[-1])
    preds: Sequence[Optional[float]] = [None] * ns.size
    if cls is ClassPredicate.H2:
        if mode == "unrestricted":
            lookup = _PrimeLookup(2, top + 1)
            counts = [_r2_unrestricted(int(n), lookup) for n in ns]
        else:
            counts = _r2_paper_many(ns, cfg)
        series = singular_series_values(2, ns, series_cut)
        preds = [weight_r2(int(n), cfg, mode) * float(s) for n, s in zip(ns, series)]
    elif cls is ClassPredicate.H3:
        pairs = _PairSums(top)
        counts = [count_R3(int(n), cfg, mode, pairs) for n in ns]
    else:
        pairs = _PairSums(top)
        counts = [count_R4(int(n), pairs) for n in ns]
    out = []
    for n, c, p in zip(ns.tolist(), counts, preds):
        ratio = c / p if p else None
        out.append(ScanRecord(n, int(c), p, ratio))
    return out


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def scan_exceptions(
    X: int,
    H: int,
    cls: Union[ClassPredicate, str],
    mode: Mode = "unrestricted",
    cfg: Optional[IntervalConfig] = None,
    workers: Optional[int] = None,
    series_cutoff: Optional[float] = None,
) -> ExceptionReport:
    """Count representations for every class member in (X, X + H].

    The window is split into contiguous shards; shards are merged in
    ascending n, so the report does not depend on the worker count.  For H2
    the predicted main term is weight_r2 times the singular series cut at
    max(P, 100), or at `series_cutoff` when given.
    """
    cls = ClassPredicate.parse(cls) if isinstance(cls, str) else cls
    _check_mode(mode, cfg)
    if H < 1 or X < 1:
        raise ValueError("X and H must be >= 1")
    if X + H >= 2**63:
        raise ValueError("window exceeds the 64-bit range")
    if cls is ClassPredicate.H4 and mode != "unrestricted":
        raise ValueError("H4 scans are only available in unrestricted mode")
    if cls is not ClassPredicate.H2 and X + H > DENSE_LIMIT:
        raise ResourceLimitError("prime-square scans are limited to n <= 5e7")
    workers = default_workers() if workers is None else max(1, int(workers))
    ns = class_members(cls, X, X + H)
    cut = main_term_cutoff(X, cfg) if series_cutoff is None else float(series_cutoff)
    if cut < 1:
        raise ValueError("series cutoff must be >= 1")
    shards = [s.tolist() for s in np.array_split(np.array(ns, dtype=np.int64), workers) if s.size]
    jobs = [(s, cls, mode, cfg, cut) for s in shards]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_shard, jobs))
    else:
        parts = [_scan_shard(j) for j in jobs]
    records = tuple(r for part in parts for r in part)
    exceptional = tuple(r.n for r in records if r.count == 0)
    ratios = [r.ratio for r in records if r.ratio is not None]
    summary = {
        "members": len(records),
        "exceptions": len(exceptional),
        "min_count": min((r.count for r in records), default=None),
        "max_count": max((r.count for r in records), default=None),
        "median_ratio": statistics.median(ratios) if ratios else None,
        "main_term_cutoff": cut if cls is ClassPredicate.H2 else None,
    }
    params = {"X": X, "H": H, "class": cls.value, "mode": mode}
    if cfg is not None:
        params.update(theta1=cfg.theta1, theta2=cfg.theta2, eps=cfg.eps, B=cfg.B)
    return ExceptionReport(X, H, cls, mode, records, exceptional, summary, params)


# ------------------------------------------------------------------ four squares


@dataclass(frozen=True)
class E4Reduction:
    n: int
    X: int
    q: int
    residue: int
    target: int
    class_ok: bool
    widened: bool
    window: tuple[float, float]


def e4_reduce(n: int, X: int, widen: float = 4.0) -> E4Reduction:
    """Subtract q^2 for a prime q near X^(1/2) so that n - q^2 lands in H3.

    q is the largest prime in (X^(1/2) - X^0.2625, X^(1/2) - X^0.2625 / 2]
    with q = 2 (mod 5) when n = 1 (mod 5) and q = 1 (mod 5) otherwise.  If
    that window has no such prime the lower end is pushed down to
    X^(1/2) - widen * X^0.2625 once; past that a LookupError is raised.
    """
    if n % 24 != 4:
        raise ValueError(f"n must be 4 mod 24, got {n}")
    if X < 100:
        raise ValueError("X must be >= 100")
    if widen < 1:
        raise ValueError("widen must be >= 1")
    residue = 2 if n % 5 == 1 else 1
    root, gap = math.sqrt(X), X**0.2625
    hi = root - gap / 2
    for widened, lo in ((False, root - gap), (True, root - widen * gap)):
        if widened and widen == 1:
            break
        ps = primes_in(max(math.floor(lo) + 1, 2), math.floor(hi) + 1)
        ps = ps[(ps > lo) & (ps % 5 == residue)]
        if ps.size:
            q = int(ps[-1])
            target = n - q * q
            if target <= 0:
                raise ValueError(f"n = {n} too small for X = {X}: target {target}")
            return E4Reduction(n, X, q, residue, target, in_class(ClassPredicate.H3, target),
                               widened, (lo, hi))
    raise LookupError(f"no prime = {residue} mod 5 in ({root - widen * gap:.1f}, {hi:.1f}]")
