"""Buchstab's function w(t).

w(t) = 1/t on (1, 2] and (t w(t))' = w(t - 1) for t > 2.  We integrate
u(t) = t w(t) on a grid that contains every integer, one unit interval at a
time: on (k, k + 1] the right-hand side w(t - 1) is already tabulated on the
previous unit, so the trapezoidal rule reduces to a cumulative sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EULER_GAMMA = 0.57721566490153286061
W_LIMIT = math.exp(-EULER_GAMMA)


@dataclass(frozen=True)
class BuchstabTable:
    t_max: float
    step: float
    t: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        return eval_w(self, t)

    @property
    def per_unit(self) -> int:
        return int(round(1.0 / self.step))

    def u(self) -> np.ndarray:
        """t * w(t) on the grid."""
        return self.t * self.values


def build_table(t_max: float = 10.0, step: float = 1e-4) -> BuchstabTable:
    if not 2 <= t_max <= 20:
        raise ValueError(f"t_max must lie in [2, 20], got {t_max}")
    if not 1e-6 <= step <= 1e-2:
        raise ValueError(f"step must lie in [1e-6, 1e-2], got {step}")
    per_unit = int(round(1.0 / step))
    h = 1.0 / per_unit  # snap so every integer is a grid point
    units = math.ceil(t_max - 1 - 1e-12)
    n = units * per_unit + 1
    t = 1.0 + np.arange(n) * h
    u = np.empty(n)
    u[: per_unit + 1] = 1.0  # t w(t) = 1 on [1, 2]
    w = np.empty(n)
    w[: per_unit + 1] = 1.0 / t[: per_unit + 1]
    for k in range(1, units):
        s = k * per_unit
        delayed = w[s - per_unit : s + 1]
        steps = 0.5 * h * (delayed[1:] + delayed[:-1])
        u[s + 1 : s + per_unit + 1] = u[s] + np.cumsum(steps)
        w[s + 1 : s + per_unit + 1] = u[s + 1 : s + per_unit + 1] / t[s + 1 : s + per_unit + 1]
    # values on (1, 2] are exact by definition
    w[1 : per_unit + 1] = 1.0 / t[1 : per_unit + 1]
    t.setflags(write=False)
    w.setflags(write=False)
    return BuchstabTable(float(t_max), h, t, w)


def eval_w(table: BuchstabTable, t):
    """w(t) for 1 < t <= t_max: exact 1/t up to 2, linear interpolation beyond."""
    arr = np.asarray(t, dtype=float)
    if arr.size and (np.min(arr) <= 1.0 or np.max(arr) > table.t[-1] + 1e-12):
        raise ValueError(f"t outside (1, {table.t[-1]:g}]")
    out = np.where(arr <= 2.0, 1.0 / np.maximum(arr, 1.0), np.interp(arr, table.t, table.values))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=8)
def default_table(t_max: float = 10.0, step: float = 1e-5) -> BuchstabTable:
    return build_table(t_max, step)


def closed_form(t: float) -> float:
    """w(t) for 1 < t <= 3: 1/t, then (1 + log(t - 1))/t."""
    if not 1 < t <= 3:
        raise ValueError("closed form only covers (1, 3]")
    return 1 / t if t <= 2 else (1 + math.log(t - 1)) / t


def _dilog_small(x: float) -> float:
    # power series, |x| <= 1/2
    return math.fsum(x**k / (k * k) for k in range(1, 80))


def integral_1_to_3() -> float:
    """Exact int_1^3 w(t) dt = log 2 + log(3/2) + log 2 log 3 + Li2(-2) - Li2(-1)."""
    li2_m2 = -math.pi**2 / 6 - 0.5 * math.log(2) ** 2 - _dilog_small(-0.5)
    li2_m1 = -math.pi**2 / 12
    return math.log(2) + math.log(1.5) + math.log(2) * math.log(3) + li2_m2 - li2_m1
