"""The ten acceptance checks, shared by ``primesq verify`` and the test suite."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import buchstab, constants, decomp, reps, singular
from .arith import is_prime, mobius
from .classes import ClassPredicate, class_members

# desk configurations with B small enough that z0^2 < min I2 and z0^3 >= max I2
DESK_CONFIGS = (
    (10**6, 0.95, 0.6, 0.0, 0.1),
    (10**6, 0.95, 0.52, 0.0, 0.1),
    (10**6, 7 / 12 + 0.01, 2 / 3 + 0.01, 0.0, 0.1),
    (10**8, 0.9, 0.6, 0.0, 0.1),
    (10**8, 0.9, 0.52, 0.0, 0.1),
    (10**8, 0.9, 0.62, 0.0, 0.1),
    (10**8, 0.9, 2 / 3 + 0.01, 0.0, 0.1),
)
R0_CONFIG = (10**6, 0.95, 0.6, 0.0, 0.1)
E4_SEED = 2024


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    measured: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail} ({self.elapsed:.1f}s)"


def _timed(fn: Callable[[], tuple[bool, str, dict]], number: int, name: str, budget: Optional[float]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail, measured = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt >= budget:
        ok = False
        detail += f"; runtime {dt:.1f}s over {budget:.0f}s budget"
    return CheckResult(number, name, ok, detail, dt, measured)


def check_sigma2_minus(mc_samples: int = 10_000_000):
    grid = constants.sigma2_minus(0.6, method="grid", resolution=2000)
    mc = constants.sigma2_minus(0.6, method="monte_carlo", samples=mc_samples, seed=0)
    gap = abs(grid.value - mc.value)
    ok = grid.value > 0.22 and gap <= 1e-3
    return ok, f"grid {grid.value:.6f} > 0.22, |grid - mc| = {gap:.2e} <= 1e-3", {
        "grid": grid.value, "mc": mc.value, "gap": gap,
    }


def check_sigma2_plus(mc_samples: int = 10_000_000):
    grid = constants.sigma2_plus(0.6, method="grid", resolution=2000)
    mc = constants.sigma2_plus(0.6, method="monte_carlo", samples=mc_samples, seed=0)
    one, _ = constants.sigma2_plus_terms(0.6, 2000)
    exact = buchstab.integral_1_to_3()
    d1 = abs(one - exact)
    gap = abs(grid.value - mc.value)
    ok = grid.value < 2.26 and d1 <= 1e-5 and gap <= 1e-3
    return ok, f"grid {grid.value:.6f} < 2.26, |1-D - closed form| = {d1:.1e}, |grid - mc| = {gap:.2e}", {
        "grid": grid.value, "mc": mc.value, "one_dim": one, "closed_form": exact,
    }


def check_vector_sieve():
    v = constants.vector_sieve_bound(1.01, 0.99, 2.26, 0.22)
    ok = v >= 0.17 and abs(v - 0.1770) <= 1e-4
    return ok, f"bound {v:.6f} >= 0.17", {"value": v}


def check_buchstab():
    table = buchstab.build_table(10.0, 1e-4)
    w2, w3, w10 = table(2.0), table(3.0), table(10.0)
    e3 = abs(w3 - (1 + math.log(2)) / 3)
    e10 = abs(w10 - 0.561459)
    ok = w2 == 0.5 and e3 <= 1e-6 and e10 <= 1e-3
    return ok, f"w(2) = {w2!r}, |w(3) - exact| = {e3:.1e}, |w(10) - 0.561459| = {e10:.1e}", {
        "w2": w2, "w3": w3, "w10": w10,
    }


def squarefree_pairs(limit: int) -> list[tuple[int, int]]:
    sf = [q for q in range(1, limit + 1) if mobius(q) != 0]
    return [(a, b) for i, a in enumerate(sf) for b in sf[i + 1 :] if a * b <= limit]


def check_orthogonality(limit: int = 2000):
    worst = 0.0
    pairs = squarefree_pairs(limit)
    for j in (2, 3):
        for q1, q2 in pairs:
            ns = np.arange(1, q1 * q2 + 1)
            s = np.sum(singular.local_factor_values(j, ns, q1) * singular.local_factor_values(j, ns, q2))
            worst = max(worst, abs(s) / (q1 * q2))
    return worst <= 1e-8, f"{2 * len(pairs)} pairs, max |sum|/(q1 q2) = {worst:.1e} <= 1e-8", {"worst": worst}


def check_multiplicativity(qmax: int = 10_000):
    ns = np.arange(10**6, 10**6 + 120, dtype=np.int64)  # every residue mod 120
    worst = 0.0
    for j in (2, 3):
        for q in range(1, qmax + 1):
            direct = singular.local_factor_values(j, ns, q, "direct")
            assembled = singular.local_factor_values(j, ns, q, "multiplicative")
            worst = max(worst, float(np.max(np.abs(direct - assembled))))
    return worst <= 1e-9, f"q <= {qmax}, max |direct - multiplicative| = {worst:.1e} <= 1e-9", {"worst": worst}


def check_identities(configs: Iterable[tuple] = DESK_CONFIGS):
    total = 0
    bad: dict[str, int] = {}
    sizes = []
    for args in configs:
        cfg = decomp.derive_config(*args)
        tables = decomp.build_weight_tables(cfg)
        for k, v in decomp.identity_violations(tables).items():
            bad[k] = bad.get(k, 0) + v
        total += len(cfg.i2_range)
        sizes.append(len(cfg.i2_range))
    nviol = sum(bad.values())
    return nviol == 0, f"{total} m over {len(sizes)} configs, violations {nviol}", {"violations": bad}


def check_r0_identity(cfg_args: tuple = R0_CONFIG, width: int = 1000):
    cfg = decomp.derive_config(*cfg_args)
    lam0 = decomp.build_weight_tables(cfg)["lambda0"]
    X = cfg.X
    bad, checked, nonzero = [], 0, 0
    for n in class_members(ClassPredicate.H2, X, X + width):
        r2 = reps.count_R2(n, cfg)
        rhs = reps.count_R_generic(n, "prime", lam0, cfg) - reps.count_R0(n, cfg)
        checked += 1
        nonzero += r2 > 0
        if r2 != rhs:
            bad.append(n)
    ok = not bad and checked > 0
    return ok, f"{checked} n in H2 ({nonzero} with R2 > 0), mismatches {len(bad)}", {"mismatches": bad}


def brute_r2_exceptions(X: int, H: int) -> list[int]:
    """Independent oracle: trial-division primality, plain loops."""
    out = []
    for n in class_members(ClassPredicate.H2, X, X + H):
        found = False
        p = 2
        while p * p < n:
            if is_prime(p) and is_prime(n - p * p):
                found = True
                break
            p += 1
        if not found:
            out.append(n)
    return out


def check_scans():
    small = reps.scan_exceptions(10**4, 100, ClassPredicate.H2, "unrestricted")
    big = reps.scan_exceptions(10**6, 10**4, ClassPredicate.H2, "unrestricted")
    oracle = brute_r2_exceptions(10**6, 10**4)
    med = big.summary["median_ratio"]
    ok = (
        len(small.exceptional) == 0
        and list(big.exceptional) == oracle
        and med is not None
        and 0.75 <= med <= 1.25
    )
    return ok, (
        f"X=1e4: {len(small.exceptional)} exceptions; X=1e6: {list(big.exceptional)} "
        f"(oracle {oracle}), median ratio {med:.4f}"
    ), {"small": list(small.exceptional), "big": list(big.exceptional), "oracle": oracle, "median": med}


def check_e4(samples: int = 100, X: int = 10**6):
    rng = np.random.default_rng(E4_SEED)
    base = X + (4 - X) % 24
    ns = sorted(set((base + 24 * rng.integers(0, 2000, samples * 2)).tolist()))[:samples]
    bad = []
    for n in ns:
        r = reps.e4_reduce(n, X)
        if not (r.target % 24 == 3 and r.target % 5 != 0 and r.class_ok):
            bad.append(n)
    return not bad and len(ns) == samples, f"{len(ns)} n, failures {len(bad)}", {"failures": bad}


CHECKS: tuple[tuple[int, str, Callable, Optional[float]], ...] = (
    (1, "sigma2_minus(3/5) > 0.22, grid vs MC", check_sigma2_minus, 60.0),
    (2, "sigma2_plus(3/5) < 2.26, 1-D closed form", check_sigma2_plus, 120.0),
    (3, "vector sieve bound >= 0.17", check_vector_sieve, None),
    (4, "Buchstab values", check_buchstab, 10.0),
    (5, "orthogonality of local factors", check_orthogonality, None),
    (6, "multiplicativity of local factors", check_multiplicativity, None),
    (7, "exact sieve identities", check_identities, 60.0),
    (8, "R2 = R(varpi, lambda0) - R0", check_r0_identity, None),
    (9, "exceptional-set scans", check_scans, None),
    (10, "four-squares reduction", check_e4, None),
)


def run_check(number: int) -> CheckResult:
    for num, name, fn, budget in CHECKS:
        if num == number:
            return _timed(fn, num, name, budget)
    raise ValueError(f"no check numbered {number}")


def run_all(numbers: Optional[Iterable[int]] = None) -> list[CheckResult]:
    wanted = set(numbers) if numbers is not None else {c[0] for c in CHECKS}
    return [run_check(num) for num, *_ in CHECKS if num in wanted]

