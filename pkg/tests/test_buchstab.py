import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from primesq.buchstab import (
    W_LIMIT,
    build_table,
    closed_form,
    default_table,
    integral_1_to_3,
)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@pytest.fixture(scope="module")
def table():
    return build_table(10.0, 1e-4)


def test_examples(table):
    assert table(2.0) == 0.5
    assert abs(table(3.0) - (1 + math.log(2)) / 3) <= 1e-6
    assert abs(table(10.0) - 0.561459) <= 1e-3


@given(st.floats(1.0, 2.0, exclude_min=True))
@settings(max_examples=200, deadline=None)
def test_exact_on_first_unit(t):
    assert default_table()(t) == 1 / t


def test_closed_form_on_second_unit(table):
    ts = np.linspace(2.0, 3.0, 401)[1:]
    got = table(ts)
    want = np.array([closed_form(float(t)) for t in ts])
    assert np.max(np.abs(got - want)) <= 1e-7


def test_closed_form_domain():
    with pytest.raises(ValueError):
        closed_form(1.0)
    with pytest.raises(ValueError):
        closed_form(3.5)


def test_envelope(table):
    vals = table.values[table.t >= 2.0]
    assert vals.min() >= 0.49 and vals.max() <= 0.62


def test_lipschitz(table):
    # calibration: max |w(t + h) - w(t)| / h over the grid is 0.9999
    k = np.max(np.abs(np.diff(table.values))) / table.step
    assert k <= 1.0


def test_delay_equation_residual(table):
    # (t w(t))' = w(t - 1) by central differences away from the integer kinks
    t, w, h = table.t, table.values, table.step
    per = table.per_unit
    idx = np.arange(per + 1, len(t) - 1)
    idx = idx[(idx % per != 0)]
    du = (t[idx + 1] * w[idx + 1] - t[idx - 1] * w[idx - 1]) / (2 * h)
    assert np.max(np.abs(du - w[idx - per])) <= 10 * h


def test_refinement_is_second_order():
    for h in (1e-2, 5e-3, 1e-3):
        a = build_table(10.0, h)(10.0)
        b = build_table(10.0, h / 2)(10.0)
        assert abs(a - b) <= 4 * h * h


def test_tends_to_limit(table):
    tail = table.values[table.t >= 8.0]
    assert np.max(np.abs(tail - W_LIMIT)) <= 1e-6


def test_integral_closed_form():
    mp = mpmath.quad(lambda t: 1 / t, [1, 2]) + mpmath.quad(lambda t: (1 + mpmath.log(t - 1)) / t, [2, 3])
    assert integral_1_to_3() == pytest.approx(float(mp), abs=1e-13)


def test_integral_matches_table(table):
    t = table.t[table.t <= 3.0 + 1e-12]
    w = table.values[: t.size]
    assert abs(_trapezoid(w, t) - integral_1_to_3()) <= 1e-6


@pytest.mark.parametrize("t_max,step", [(1.5, 1e-3), (25, 1e-3), (10, 1e-1), (10, 1e-8)])
def test_bad_arguments(t_max, step):
    with pytest.raises(ValueError):
        build_table(t_max, step)


def test_evaluation_domain(table):
    with pytest.raises(ValueError):
        table(1.0)
    with pytest.raises(ValueError):
        table(10.5)
