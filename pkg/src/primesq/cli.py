"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 an internal cross-check failed.
Output is a pure function of argv; wall-clock timing goes to stderr and is
written into the output only with --timing.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from typing import Optional, Sequence

from . import __version__
from .arith import ResourceLimitError
from .serialize import csv_text, dumps

EXIT_OK, EXIT_INVALID, EXIT_CONSISTENCY = 0, 1, 2
SCHEMA_VERSION = 1  # bump with docs/output_schemas.md


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    v = int(float(text)) if "e" in text.lower() else int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text}")
    return v


def _add_config_args(p: argparse.ArgumentParser, theta1: float, theta2: float) -> None:
    p.add_argument("--theta1", type=_finite, default=theta1)
    p.add_argument("--theta2", type=_finite, default=theta2)
    p.add_argument("--eps", type=_finite, default=0.0)
    p.add_argument("--B", dest="B", type=_finite, default=0.1)


def _add_output_args(p: argparse.ArgumentParser, default_format: str = "json") -> None:
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--output", "-o", help="write here instead of stdout")
    p.add_argument("--timing", action="store_true", help="embed wall-clock seconds in the header")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="primesq", description="Prime plus prime-square toolkit.")
    parser.add_argument("--version", action="version", version=f"primesq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("scan", help="exceptional-set scan over (X, X + H]")
    p.add_argument("--x", dest="X", type=_positive_int, required=True)
    p.add_argument("--h", dest="H", type=_positive_int, required=True)
    p.add_argument("--class", dest="cls", type=str.upper, choices=("H2", "H3", "H4"), default="H2")
    p.add_argument("--mode", choices=("paper_intervals", "unrestricted"), default="unrestricted")
    p.add_argument("--p-override", type=_finite, default=None,
                   help="singular-series cutoff for the main term (default max(P, 100))")
    p.add_argument("--workers", type=_positive_int, default=None)
    _add_config_args(p, 0.95, 0.6)
    _add_output_args(p)

    p = sub.add_parser("singular", help="truncated singular series and Euler product")
    p.add_argument("--j", type=int, choices=(2, 3), default=2)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--P", dest="P", type=_finite, default=100.0)
    p.add_argument("--Q", dest="Q", type=_finite, default=None, help="product cutoff (default P)")
    _add_output_args(p)

    p = sub.add_parser("buchstab", help="tabulate Buchstab's function")
    p.add_argument("--t-max", type=_finite, default=10.0)
    p.add_argument("--step", type=_finite, default=1e-4)
    p.add_argument("--every", type=_positive_int, default=1, help="emit every k-th grid row")
    _add_output_args(p, "csv")

    p = sub.add_parser("decomp", help="sieve weights on I2 with identity checks")
    p.add_argument("--x", dest="X", type=_positive_int, default=10**6)
    _add_config_args(p, 0.95, 0.6)
    _add_output_args(p)

    p = sub.add_parser("constants", help="sieve constants sigma2 and the combined bound")
    p.add_argument("--theta2", type=_finite, default=0.6)
    p.add_argument("--eps", type=_finite, default=0.0)
    p.add_argument("--method", choices=("grid", "monte_carlo"), default="grid")
    p.add_argument("--resolution", type=_positive_int, default=2000)
    p.add_argument("--samples", type=_positive_int, default=10**7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma1-plus", type=_finite, default=1.01)
    p.add_argument("--sigma1-minus", type=_finite, default=0.99)
    _add_output_args(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", type=int, nargs="+", help="check numbers to run")
    _add_output_args(p, "csv")
    return parser


def _header(args: argparse.Namespace, elapsed: Optional[float]) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "timing", "format")}
    head = {"tool": "primesq", "version": __version__, "schema": SCHEMA_VERSION, "params": params}
    if elapsed is not None:
        head["wall_seconds"] = elapsed
    return head


# ------------------------------------------------------------------ commands


def _cmd_scan(args):
    from .decomp import derive_config
    from .reps import scan_exceptions

    cfg = None
    if args.mode == "paper_intervals":
        cfg = derive_config(args.X, args.theta1, args.theta2, args.eps, args.B)
    report = scan_exceptions(args.X, args.H, args.cls, args.mode, cfg, args.workers, args.p_override)
    if args.format == "csv":
        return lambda head: report.to_csv({**head, "summary": report.summary})
    return lambda head: report.to_json(head)


def _cmd_singular(args):
    import numpy as np

    from .singular import local_factor, singular_product_values, singular_series_values

    if args.P < 1:
        raise ValueError("P must be >= 1")
    Q = args.P if args.Q is None else args.Q
    ns = np.array(args.n, dtype=np.int64)
    # cross-check the tables against prime-power assembly (raises on mismatch)
    for q in range(1, min(int(args.P), 200) + 1):
        for n in args.n[:8]:
            local_factor(args.j, n, q)
    series = singular_series_values(args.j, ns, args.P)
    product = singular_product_values(args.j, ns, Q)
    rows = [(int(n), float(s), float(p)) for n, s, p in zip(ns, series, product)]
    cols = ["n", "series", "product"]
    if args.format == "csv":
        return lambda head: csv_text(cols, rows, head)
    return lambda head: dumps({"header": head, "j": args.j, "P": args.P, "Q": Q,
                               "records": [dict(zip(cols, r)) for r in rows]})


def _cmd_buchstab(args):
    from .buchstab import build_table

    table = build_table(args.t_max, args.step)
    idx = list(range(0, len(table.t), args.every))
    if idx[-1] != len(table.t) - 1:
        idx.append(len(table.t) - 1)
    rows = [(float(table.t[i]), float(table.values[i])) for i in idx]
    if args.format == "csv":
        return lambda head: csv_text(["t", "w"], rows, head)
    return lambda head: dumps({"header": head, "step": table.step,
                               "t": [r[0] for r in rows], "w": [r[1] for r in rows]})


def _cmd_decomp(args):
    from .decomp import build_weight_tables, derive_config, identity_violations

    cfg = derive_config(args.X, args.theta1, args.theta2, args.eps, args.B)
    tables = build_weight_tables(cfg)
    stats = {name: t.summary() for name, t in tables.items()}
    viol = identity_violations(tables)
    body = {"config": cfg.as_dict(), "weights": stats, "identity_violations": viol}
    # violations are expected only on configurations flagged as degenerate
    code = EXIT_CONSISTENCY if any(viol.values()) and not cfg.flags else EXIT_OK
    if args.format == "csv":
        rows = [(k, v["support_size"], v["sum"], v["min"], v["max"]) for k, v in stats.items()]
        return (lambda head: csv_text(["weight", "support_size", "sum", "min", "max"], rows,
                                      {**head, "flags": list(cfg.flags), "identity_violations": viol}),
                code)
    return (lambda head: dumps({"header": head, **body})), code


def _cmd_constants(args):
    from .constants import sigma2_minus, sigma2_plus, vector_sieve_bound

    kw = dict(samples=args.samples, seed=args.seed)
    lo = sigma2_minus(args.theta2, args.eps, args.method, args.resolution, **kw)
    hi = sigma2_plus(args.theta2, args.eps, args.method, args.resolution, **kw)
    value = vector_sieve_bound(args.sigma1_plus, args.sigma1_minus, hi.value, lo.value)
    err = args.sigma1_plus * lo.error + abs(args.sigma1_minus - args.sigma1_plus) * hi.error

    def entry(value, error):
        return {
            "value": value, "error": error, "method": args.method,
            "resolution": args.resolution if args.method == "grid" else None,
            "samples": args.samples if args.method == "monte_carlo" else None,
            "seed": args.seed if args.method == "monte_carlo" else None,
        }

    out = {
        "sigma2_minus": entry(lo.value, lo.error),
        "sigma2_plus": entry(hi.value, hi.error),
        "combined": entry(value, err),
    }
    if args.format == "csv":
        rows = [(k, v["value"], v["error"], v["method"], v["resolution"], v["samples"], v["seed"])
                for k, v in out.items()]
        return lambda head: csv_text(["kind", "value", "error", "method", "resolution", "samples", "seed"],
                                     rows, head)
    return lambda head: dumps({"header": head, "theta2": args.theta2, "eps": args.eps, **out})


def _cmd_verify(args):
    from .verify import run_all

    results = run_all(args.only)
    for r in results:
        print(r.line(), file=sys.stderr)
    failed = [r.number for r in results if not r.passed]
    rows = [(r.number, r.name, "pass" if r.passed else "fail", r.detail) for r in results]
    cols = ["check", "name", "status", "detail"]
    if args.format == "csv":
        render = lambda head: csv_text(cols, rows, head)  # noqa: E731
    else:
        render = lambda head: dumps({"header": head, "results": [dict(zip(cols, r)) for r in rows]})  # noqa: E731
    return render, (EXIT_CONSISTENCY if failed else EXIT_OK)


COMMANDS = {
    "scan": _cmd_scan,
    "singular": _cmd_singular,
    "buchstab": _cmd_buchstab,
    "decomp": _cmd_decomp,
    "constants": _cmd_constants,
    "verify": _cmd_verify,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    from .singular import ConsistencyError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    t0 = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except ConsistencyError as exc:
        print(f"primesq: consistency check failed: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ValueError, ResourceLimitError, LookupError) as exc:
        print(f"primesq: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    render, code = result if isinstance(result, tuple) else (result, EXIT_OK)
    elapsed = time.perf_counter() - t0
    text = render(_header(args, elapsed if args.timing else None))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"primesq {args.command}: {elapsed:.3f}s", file=sys.stderr)
    return code


def main() -> int:
    try:
        return run(sys.argv[1:])
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK
