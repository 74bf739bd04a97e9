"""Sieve constants sigma_2^{+/-}(theta_2) and the vector-sieve combination.

sigma_2^- = 1 - I_minus and sigma_2^+ = 1 + I_one + I_plus, where

    I_minus = iint_{D-} w((1 - u1 - u2)/u2) du1 du2 / (u1 u2^2)
        D-: a < u2 < u1 < 1/2,  u1 + 2 u2 < 1,  u1 + u2 < 2 - 2 theta_2
    I_one   = int_{max(1/4, a)}^{1/2} w((1 - u)/u) du / u^2
    I_plus  = iiint_{D+} w((1 - u1 - u2 - u3)/u3) du1 du2 du3 / (u1 u2 u3^2)
        D+: a < u3 < u2 < u1 < 1/4

with a = 2 theta_2 - 1 > 0.  The O(eps) slack is not part of the integrands
and is dropped; eps is only carried through to the output.

Two independent evaluations are provided:

* ``grid`` slices the polytope along its outer variable, computes the inner
  limits exactly from the linear constraints, and splits every slice at the
  lines where w's argument crosses 2 or 3 (w' jumps at 2, w'' at 3).  Each
  piece is then integrated with the tensor midpoint rule, so the rule is
  second order on the whole region.
* ``monte_carlo`` samples the bounding box uniformly and masks by the raw
  inequalities.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from .buchstab import BuchstabTable, default_table

# sigma_1^{+/-} at theta_1 = 0.55 + eps come from an external sieve
# construction for the linear variable; they are imported bounds, not computed.
SIGMA1_PLUS = 1.01
SIGMA1_MINUS = 0.99

KINKS = (2.0, 3.0)
MC_CHUNK = 1_000_000
MC_ERROR_MULTIPLIER = 3.0  # reported MC error is 3 standard errors

Method = Literal["grid", "monte_carlo"]


@dataclass(frozen=True)
class SieveConstant:
    kind: Literal["sigma2_minus", "sigma2_plus", "combined"]
    theta2: float
    eps: float
    value: float
    method: str
    resolution: Optional[int]
    samples: Optional[int]
    seed: Optional[int]
    error: float
    stderr: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _check_theta2(theta2: float) -> float:
    if not 0.5 < theta2 < 1:
        raise ValueError(f"theta2 must lie in (1/2, 1), got {theta2}")
    a = 2 * theta2 - 1
    # largest argument of w on either region is (1 - 2a)/a < 1/a
    if 1 / a > 19:
        raise ValueError(f"theta2 = {theta2} too close to 1/2 for the Buchstab table")
    return a


def _table_for(a: float, table: Optional[BuchstabTable]) -> BuchstabTable:
    t_max = min(20.0, max(4.0, math.ceil(1 / a) + 1.0))
    if table is not None and table.t[-1] >= 1 / a:
        return table
    return default_table(t_max)


# ------------------------------------------------------------------ grid rule

Line = tuple[float, float]  # y = c0 + c1 * x


def _at(line: Line, x):
    return line[0] + line[1] * x


def _breakpoints(lines: Sequence[Line], lo: float, hi: float) -> list[float]:
    pts = {lo, hi}
    for i, (a0, a1) in enumerate(lines):
        for b0, b1 in lines[i + 1 :]:
            if a1 != b1:
                x = (b0 - a0) / (a1 - b1)
                if lo < x < hi:
                    pts.add(x)
    return sorted(pts)


def _slice_integrate(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_lo: float,
    x_hi: float,
    lowers: Sequence[Line],
    uppers: Sequence[Line],
    kinks: Sequence[Line],
    n: int,
    scale_x: float,
    scale_y: float,
    extra_breaks: Sequence[float] = (),
) -> float:
    """Integrate f(x, y) over x_lo < x < x_hi, max(lowers) < y < min(uppers).

    The outer range is cut wherever two of the lines cross, so that on each
    piece the ordering of bounds and kink lines is fixed.  `n` is the number
    of midpoints per `scale_x` (resp. `scale_y`) of length.
    """
    if x_hi <= x_lo:
        return 0.0
    pts = sorted(
        set(_breakpoints(list(lowers) + list(uppers) + list(kinks), x_lo, x_hi))
        | {b for b in extra_breaks if x_lo < b < x_hi}
    )
    total = 0.0
    for x0, x1 in zip(pts[:-1], pts[1:]):
        xm = 0.5 * (x0 + x1)
        low = max(lowers, key=lambda ln: _at(ln, xm))
        up = min(uppers, key=lambda ln: _at(ln, xm))
        ylo, yhi = _at(low, xm), _at(up, xm)
        if yhi <= ylo:
            continue
        inner = [k for k in kinks if ylo < _at(k, xm) < yhi]
        edges = [low] + sorted(inner, key=lambda ln: _at(ln, xm)) + [up]
        nx = max(1, math.ceil(n * (x1 - x0) / scale_x))
        xs = x0 + (np.arange(nx) + 0.5) * ((x1 - x0) / nx)
        dx = (x1 - x0) / nx
        for la, lb in zip(edges[:-1], edges[1:]):
            widths = _at(lb, xs) - _at(la, xs)
            span = max(_at(lb, x0) - _at(la, x0), _at(lb, x1) - _at(la, x1))
            ny = max(1, math.ceil(n * span / scale_y))
            frac = (np.arange(ny) + 0.5) / ny
            for start in range(0, nx, 512):
                xc = xs[start : start + 512]
                wc = widths[start : start + 512]
                ys = _at(la, xc)[:, None] + wc[:, None] * frac[None, :]
                vals = f(np.broadcast_to(xc[:, None], ys.shape), ys)
                total += float(np.sum(vals.mean(axis=1) * wc)) * dx
    return total


def _minus_integrand(w: BuchstabTable):
    def f(u2, u1):
        return w((1 - u1 - u2) / u2) / (u1 * u2 * u2)

    return f


def _minus_grid(theta2: float, n: int, w: BuchstabTable) -> float:
    a = 2 * theta2 - 1
    b = min(1 / 3, 1 - theta2)
    lowers = [(0.0, 1.0)]  # u1 > u2
    uppers = [(0.5, 0.0), (1.0, -2.0), (2 - 2 * theta2, -1.0)]
    kinks = [(1.0, -(k + 1)) for k in KINKS]  # (1 - u1 - u2)/u2 = k
    # singular factor 1/(u1 u2^2) is bounded by 1/a^3 on the region
    if not a > 0:
        raise ValueError("region touches u2 = 0")
    return _slice_integrate(_minus_integrand(w), a, b, lowers, uppers, kinks, n, 0.5 - a, 0.5 - a)


def _one_dim(theta2: float, n: int, w: BuchstabTable) -> float:
    lo = max(0.25, 2 * theta2 - 1)
    if lo >= 0.5:
        return 0.0
    pts = sorted({lo, 0.5} | {1 / (k + 1) for k in KINKS if lo < 1 / (k + 1) < 0.5})
    total = 0.0
    for x0, x1 in zip(pts[:-1], pts[1:]):
        m = max(1, math.ceil(n * (x1 - x0) / 0.25))
        xs = x0 + (np.arange(m) + 0.5) * ((x1 - x0) / m)
        total += float(np.sum(w((1 - xs) / xs) / (xs * xs))) * ((x1 - x0) / m)
    return total


def one_dim_closed_form_check(theta2: float, w: BuchstabTable) -> float:
    """The 1-D term after t = (1 - u)/u, i.e. int_1^T w(t) dt, by trapezoid on the table."""
    lo = max(0.25, 2 * theta2 - 1)
    if lo >= 0.5:
        return 0.0
    top = (1 - lo) / lo
    sel = w.t <= top + 1e-12
    t = w.t[sel]
    vals = w.values[sel].copy()
    vals[0] = 1.0  # w(1+) = 1
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(t)))


def _plus_triple_grid(theta2: float, n: int, w: BuchstabTable) -> float:
    a = 2 * theta2 - 1
    b = 0.25
    if a >= b:
        return 0.0
    # u3-values where a kink line (1 - u1 - u2 - u3)/u3 = k passes through a
    # vertex of the (u2, u1) triangle u3 < u2 < u1 < 1/4
    breaks = set()
    for k in KINKS:
        c = k + 1
        for x in (1 / (c + 2), 0.75 / (c + 1), 0.5 / c):
            if a < x < b:
                breaks.add(x)
    pts = sorted({a, b} | breaks)
    total = 0.0
    for x0, x1 in zip(pts[:-1], pts[1:]):
        m = max(1, math.ceil(n * (x1 - x0) / (b - a)))
        d3 = (x1 - x0) / m
        for u3 in (x0 + (np.arange(m) + 0.5) * d3).tolist():

            def f(u2, u1, u3=u3):
                return w((1 - u1 - u2 - u3) / u3) / (u1 * u2 * u3 * u3)

            kinks = [(1 - (k + 1) * u3, -1.0) for k in KINKS]
            inner = _slice_integrate(
                f, u3, b, [(0.0, 1.0)], [(b, 0.0)], kinks, n, b - a, b - a
            )
            total += inner * d3
    return total


# ------------------------------------------------------------------ Monte Carlo


def _mc_box(
    f: Callable[..., np.ndarray],
    box: Sequence[tuple[float, float]],
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """Plain hit-or-miss estimate of the integral of f over a box.

    Chunk i draws from the i-th child of SeedSequence(seed), so the estimate
    depends only on (seed, samples) and not on how chunks are scheduled.
    """
    vol = math.prod(hi - lo for lo, hi in box)
    n_chunks = max(1, math.ceil(samples / MC_CHUNK))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    s1 = s2 = 0.0
    done = 0
    for child in children:
        size = min(MC_CHUNK, samples - done)
        rng = np.random.default_rng(child)
        pts = [rng.uniform(lo, hi, size) for lo, hi in box]
        vals = f(*pts)
        s1 += math.fsum(vals)
        s2 += math.fsum(vals * vals)
        done += size
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return vol * mean, vol * math.sqrt(var / samples)


def _masked(cond, expr):
    def f(*u):
        ok = cond(*u)
        out = np.zeros(u[0].shape)
        args = [x[ok] for x in u]
        out[ok] = expr(*args)
        return out

    return f


def _minus_mc(theta2: float, samples: int, seed: int, w: BuchstabTable):
    a = 2 * theta2 - 1
    c = 2 - 2 * theta2
    if a >= 1 / 3:
        return 0.0, 0.0
    cond = lambda u1, u2: (a < u2) & (u2 < u1) & (u1 < 0.5) & (u1 + 2 * u2 < 1) & (u1 + u2 < c)
    expr = lambda u1, u2: w((1 - u1 - u2) / u2) / (u1 * u2 * u2)
    return _mc_box(_masked(cond, expr), [(a, 0.5), (a, 1 / 3)], samples, seed)


def _plus_mc(theta2: float, samples: int, seed: int, w: BuchstabTable):
    a = 2 * theta2 - 1
    lo = max(0.25, a)
    if lo >= 0.5:
        return (0.0, 0.0), (0.0, 0.0)
    one = _mc_box(lambda u: w((1 - u) / u) / (u * u), [(lo, 0.5)], samples, seed)
    if a >= 0.25:
        return one, (0.0, 0.0)
    cond = lambda u1, u2, u3: (a < u3) & (u3 < u2) & (u2 < u1) & (u1 < 0.25)
    expr = lambda u1, u2, u3: w((1 - u1 - u2 - u3) / u3) / (u1 * u2 * u3 * u3)
    box = [(a, 0.25)] * 3
    triple = _mc_box(_masked(cond, expr), box, samples, seed + 1)
    return one, triple


# ------------------------------------------------------------------ public API


def sigma2_minus(
    theta2: float,
    eps: float = 0.0,
    method: Method = "grid",
    resolution: int = 2000,
    *,
    samples: int = 10_000_000,
    seed: int = 0,
    table: Optional[BuchstabTable] = None,
) -> SieveConstant:
    a = _check_theta2(theta2)
    w = _table_for(a, table)
    if method == "grid":
        value = _minus_grid(theta2, resolution, w)
        coarse = _minus_grid(theta2, max(1, resolution // 2), w)
        return SieveConstant(
            "sigma2_minus", theta2, eps, 1 - value, "grid", resolution, None, None,
            abs(value - coarse) / 3,
        )
    if method == "monte_carlo":
        est, se = _minus_mc(theta2, samples, seed, w)
        return SieveConstant(
            "sigma2_minus", theta2, eps, 1 - est, "monte_carlo", None, samples, seed,
            MC_ERROR_MULTIPLIER * se, se,
        )
    raise ValueError(f"unknown method {method!r}")


def sigma2_plus_terms(theta2: float, resolution: int = 2000, resolution3: Optional[int] = None,
                      table: Optional[BuchstabTable] = None) -> tuple[float, float]:
    """(one-dimensional term, triple integral) by the grid rule."""
    a = _check_theta2(theta2)
    w = _table_for(a, table)
    n3 = resolution3 if resolution3 is not None else min(resolution, 256)
    return _one_dim(theta2, resolution, w), _plus_triple_grid(theta2, n3, w)


def sigma2_plus(
    theta2: float,
    eps: float = 0.0,
    method: Method = "grid",
    resolution: int = 2000,
    *,
    resolution3: Optional[int] = None,
    samples: int = 10_000_000,
    seed: int = 0,
    table: Optional[BuchstabTable] = None,
) -> SieveConstant:
    """1 + one-dimensional term + triple integral.

    The triple integral is a 3-D grid, so its per-axis count `resolution3`
    defaults to min(resolution, 256).
    """
    a = _check_theta2(theta2)
    w = _table_for(a, table)
    if method == "grid":
        n3 = resolution3 if resolution3 is not None else min(resolution, 256)
        one, triple = sigma2_plus_terms(theta2, resolution, n3, w)
        one_c, triple_c = sigma2_plus_terms(theta2, max(1, resolution // 2), max(1, n3 // 2), w)
        err = abs(one + triple - one_c - triple_c) / 3
        return SieveConstant(
            "sigma2_plus", theta2, eps, 1 + one + triple, "grid", resolution, None, None, err,
        )
    if method == "monte_carlo":
        (one, se1), (triple, se3) = _plus_mc(theta2, samples, seed, w)
        se = math.hypot(se1, se3)
        return SieveConstant(
            "sigma2_plus", theta2, eps, 1 + one + triple, "monte_carlo", None, samples, seed,
            MC_ERROR_MULTIPLIER * se, se,
        )
    raise ValueError(f"unknown method {method!r}")


def vector_sieve_bound(s1_plus: float, s1_minus: float, s2_plus: float, s2_minus: float) -> float:
    """Main-term coefficient s1+ s2- + s1- s2+ - s1+ s2+ of the three-term bracket."""
    if s1_minus > s1_plus or s2_minus > s2_plus:
        raise ValueError("bracket violated: need s1- <= s1+ and s2- <= s2+")
    return s1_plus * s2_minus + s1_minus * s2_plus - s1_plus * s2_plus


def combined(
    theta2: float,
    eps: float = 0.0,
    method: Method = "grid",
    resolution: int = 2000,
    *,
    samples: int = 10_000_000,
    seed: int = 0,
    s1_plus: float = SIGMA1_PLUS,
    s1_minus: float = SIGMA1_MINUS,
) -> SieveConstant:
    lo = sigma2_minus(theta2, eps, method, resolution, samples=samples, seed=seed)
    hi = sigma2_plus(theta2, eps, method, resolution, samples=samples, seed=seed)
    value = vector_sieve_bound(s1_plus, s1_minus, hi.value, lo.value)
    # d/ds2- = s1+, d/ds2+ = s1- - s1+
    err = s1_plus * lo.error + abs(s1_minus - s1_plus) * hi.error
    return SieveConstant(
        "combined", theta2, eps, value, method, lo.resolution, lo.samples, lo.seed, err,
    )
