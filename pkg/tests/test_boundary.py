import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from robsched.boundary import (ON_CURVE_TOL, TRACE_TOL, Box, BoundaryCurve, Metric, Side,
                               WorkingPoint, central_gradient, column_positions, feasible,
                               gradient, residual, trace)
from robsched.errors import NonErgodic, StencilOutOfBox

from conftest import JOINT_PROFIT, JOINT_WAIT, PROFIT_A, REPORTED_B

BOX = Box()


def linear(c):
    return BoundaryCurve(Metric.CUSTOM, c, BOX, feasible_side=Side.BELOW,
                         fn=lambda m, s: 2 * m + 3 * s)


def hausdorff(a, b):
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def test_box_validation():
    with pytest.raises(ValueError):
        Box(4, 3, 2, 3)
    with pytest.raises(ValueError):
        Box(0, 1, 2, 3)
    with pytest.raises(NonErgodic):
        BoundaryCurve(Metric.PROFIT, 30, Box(1, 2, 1, 2))


def test_default_sides():
    assert BoundaryCurve(Metric.PROFIT, 30).feasible_side is Side.ABOVE
    assert BoundaryCurve(Metric.MEAN_WAIT, 0.1).feasible_side is Side.BELOW
    with pytest.raises(ValueError):
        BoundaryCurve(Metric.CUSTOM, 1, fn=lambda m, s: m)


def test_residual_sign(profit_curve):
    assert residual(profit_curve, WorkingPoint(3, 2)) > 0  # profit well above threshold
    assert residual(profit_curve, WorkingPoint(4, 3)) < 0


def test_traced_vertices_have_small_residual(profit_curve):
    poly = trace(profit_curve, 100)
    for m, s in poly.points:
        assert abs(residual(profit_curve, WorkingPoint(m, s))) <= ON_CURVE_TOL
    assert poly.max_residual <= TRACE_TOL


def test_residual_is_lipschitz_on_grid(profit_curve):
    h = 1e-4
    M, S = np.meshgrid(np.linspace(3, 4 - h, 40), np.linspace(2, 3 - h, 40))
    r = profit_curve.residual(M, S)
    lip = max(np.max(np.abs(profit_curve.residual(M + h, S) - r)),
              np.max(np.abs(profit_curve.residual(M, S + h) - r))) / h
    assert np.isfinite(lip) and lip < 100


def test_wait_gradient_negative():
    c = BoundaryCurve(Metric.MEAN_WAIT, 0.05)
    dm, ds = gradient(c, WorkingPoint(3.0 + 1e-3, 2.5))
    assert dm < 0 and ds < 0


def test_gradient_exact_on_linear():
    dm, ds = gradient(linear(15), WorkingPoint(3.5, 2.5))
    assert dm == pytest.approx(2, abs=1e-8) and ds == pytest.approx(3, abs=1e-8)


def richardson(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def test_gradient_against_richardson(profit_curve):
    rng = np.random.default_rng(5)
    for m, s in zip(rng.uniform(3.1, 3.9, 10), rng.uniform(2.1, 2.9, 10)):
        dm, ds = gradient(profit_curve, WorkingPoint(m, s))
        rm = richardson(lambda x: profit_curve.value(x, s), m, 1e-3)
        rs = richardson(lambda x: profit_curve.value(m, x), s, 1e-3)
        assert dm == pytest.approx(rm, rel=1e-5)
        assert ds == pytest.approx(rs, rel=1e-5)


def test_gradient_stencil_out_of_box(profit_curve):
    with pytest.raises(StencilOutOfBox):
        gradient(profit_curve, WorkingPoint(3.0, 2.5))
    with pytest.raises(ValueError):
        gradient(profit_curve, WorkingPoint(3.5, 2.5), h=0.0)


def test_gradient_symmetric_in_step(profit_curve):
    pt = WorkingPoint(3.4, 2.6)
    assert gradient(profit_curve, pt, 1e-5) == gradient(profit_curve, pt, -1e-5)


def test_trace_matches_scalar_root():
    c = BoundaryCurve(Metric.MEAN_WAIT, 0.08)
    s_star = brentq(lambda s: c.residual(3.0, s), 2, 3, xtol=1e-14)
    poly = trace(c, 50)
    assert poly.points[0, 0] == 3.0
    assert poly.points[0, 1] == pytest.approx(s_star, abs=1e-7)


def test_wait_curve_slopes_down():
    poly = trace(BoundaryCurve(Metric.MEAN_WAIT, 0.05), 100)
    assert len(poly) > 10
    assert np.all(np.diff(poly.points[:, 1]) < 0)
    assert np.all(np.diff(poly.points[:, 0]) > 0)


def test_trace_empty_when_level_unreachable():
    assert trace(BoundaryCurve(Metric.MEAN_WAIT, 5.0), 20).empty
    assert trace(BoundaryCurve(Metric.PROFIT, 1000.0), 20).empty


def test_trace_rejects_single_column(profit_curve):
    with pytest.raises(ValueError):
        trace(profit_curve, 1)


@pytest.mark.parametrize("n", [10, 25, 64])
def test_trace_refines_monotonically(n):
    c = BoundaryCurve(Metric.PROFIT, PROFIT_A)
    coarse, fine = trace(c, n), trace(c, 2 * n - 1)
    assert set(column_positions(BOX, n)) <= set(column_positions(BOX, 2 * n - 1))
    assert hausdorff(coarse.points, fine.points) <= BOX.width / n


def test_multi_root_column_keeps_feasible_side():
    # parabola in s: two roots per column, feasible band between them
    c = BoundaryCurve(Metric.CUSTOM, 0.04, BOX, feasible_side=Side.BELOW,
                      fn=lambda m, s: (s - 2.5) ** 2 + 0 * m)
    poly = trace(c, 5)
    assert len(poly.multi_root) == 5
    # bottom of each column is infeasible, so the upper root is kept
    np.testing.assert_allclose(poly.points[:, 1], 2.7, atol=1e-7)
    flipped = trace(c.flipped(), 5)
    np.testing.assert_allclose(flipped.points[:, 1], 2.3, atol=1e-7)


def test_polyline_csv(profit_curve):
    buf = io.StringIO()
    trace(profit_curve, 3).write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "m,s,residual"
    assert len(lines) == 4
    assert lines[1].startswith("3,")


def test_feasible_examples(profit_curve):
    pt = WorkingPoint(3.5, 2.5)
    assert feasible(pt, [])
    poly = trace(profit_curve, 10)
    on = WorkingPoint(*poly.points[4])
    assert feasible(on, [profit_curve])
    assert feasible(on, [profit_curve.flipped()])


def test_reported_joint_optimum_is_feasible(joint_curves):
    assert feasible(WorkingPoint(*REPORTED_B), joint_curves)


@settings(max_examples=200, deadline=None)
@given(m=st.floats(3, 4), s=st.floats(2, 3))
def test_flipping_side_flips_verdict(m, s):
    c = BoundaryCurve(Metric.PROFIT, JOINT_PROFIT)
    if abs(c.residual(m, s)) > ON_CURVE_TOL:
        assert feasible(WorkingPoint(m, s), [c]) != feasible(WorkingPoint(m, s), [c.flipped()])


def test_vectorised_value_matches_scalar():
    c = BoundaryCurve(Metric.MEAN_WAIT, JOINT_WAIT)
    ms = np.array([3.1, 3.6])
    ss = np.array([2.2, 2.9])
    v = c.value(ms, ss)
    assert v[0] == c.value(3.1, 2.2) and v[1] == c.value(3.6, 2.9)


def test_exact_flag_uses_exact_model():
    c = BoundaryCurve(Metric.MEAN_WAIT, 0.1, exact=True)
    assert c.value(3.0, 2.0) == pytest.approx(2 / 9, rel=1e-13)


def test_central_gradient_vectorised(profit_curve):
    dm, ds = central_gradient(profit_curve, np.array([3.5, 3.6]), np.array([2.5, 2.4]), 1e-6)
    assert dm.shape == (2,) and ds.shape == (2,)
