"""The ten acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line, so

    pytest tests/test_acceptance.py -s

or ``python tests/test_acceptance.py`` gives the full table.  Tolerances and
runtime budgets live in ``primesq.verify`` and are shared with
``primesq verify``.
"""

import sys

import pytest

from primesq.verify import CHECKS, run_check


@pytest.mark.parametrize("number", [c[0] for c in CHECKS], ids=[f"criterion{c[0]:02d}" for c in CHECKS])
def test_criterion(number, capsys):
    result = run_check(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


def main() -> int:
    failed = 0
    for number, *_ in CHECKS:
        result = run_check(number)
        print(result.line(), flush=True)
        failed += not result.passed
    print(f"{len(CHECKS) - failed}/{len(CHECKS)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
