"""Conjugacy map, curve derivative/integral, and Taylor evaluation."""

import math

import numpy as np
import pytest

from fractalkinetics import (
    CurveFunction,
    GridFunction,
    ResolutionError,
    ValidationError,
    build_curve,
    build_staircase,
    conjugate_derivatives_at,
    fractal_derivative,
    fractal_derivative_function,
    fractal_integral,
    from_conjugate,
    grid_derivative,
    koch_generator,
    locate,
    point_at_conjugate,
    running_integral,
    segment_generator,
    taylor_eval,
    to_conjugate,
)

KOCH_MASS = 0.876603109987812


@pytest.fixture(scope="module")
def koch():
    curve = build_curve(koch_generator(), level=6)
    return curve, build_staircase(curve)


def _conjugate_samples(curve, staircase, fn):
    """CurveFunction whose knot samples equal fn(y) on the conjugate grid."""
    return CurveFunction(curve=curve, knot_values=fn(staircase.values))


def test_grid_function_validation():
    with pytest.raises(ValidationError):
        GridFunction(grid=np.array([0.0, 1.0, 1.0]), values=np.zeros(3))
    with pytest.raises(ValidationError):
        GridFunction(grid=np.array([0.0, 1.0]), values=np.zeros(3))


def test_curve_function_needs_exactly_one_source(koch):
    curve, _ = koch
    with pytest.raises(ValidationError):
        CurveFunction(curve=curve)
    with pytest.raises(ValidationError):
        CurveFunction(curve=curve, rule=lambda p: p[:, 0],
                      knot_values=np.zeros(curve.knot_count))
    with pytest.raises(ValidationError):
        CurveFunction(curve=curve, knot_values=np.zeros(7))


def test_conjugate_image_of_constant(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.full(len(p), 3.5))
    g = to_conjugate(f, curve, staircase)
    assert np.all(g.values == 3.5)
    assert np.array_equal(g.grid, staircase.values)


def test_conjugate_image_of_coordinate_is_identity(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, lambda y: y)
    g = to_conjugate(f, curve, staircase)
    assert np.array_equal(g.values, g.grid)


def test_conjugate_image_spot_value_at_end(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.sum(p * p, axis=1))
    g = to_conjugate(f, curve, staircase)
    # curve end is (1, 0), so |theta|^2 there is exactly 1
    assert g.values[-1] == 1.0
    assert abs(g.grid[-1] - KOCH_MASS) < 1e-12


def test_round_trip_bit_identical(koch):
    curve, staircase = koch
    rng = np.random.default_rng(7)
    f = CurveFunction(curve=curve, knot_values=rng.normal(size=curve.knot_count))
    g = to_conjugate(f, curve, staircase)
    back = from_conjugate(g, curve, staircase)
    assert np.array_equal(back.values_at_knots(), f.values_at_knots())


def test_from_conjugate_rejects_foreign_grid(koch):
    curve, staircase = koch
    g = GridFunction(grid=np.linspace(0.0, 1.0, 11), values=np.zeros(11))
    with pytest.raises(ValidationError):
        from_conjugate(g, curve, staircase)


def test_derivative_of_coordinate_is_one(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, lambda y: y)
    d = fractal_derivative_function(f, curve, staircase)
    assert np.allclose(d.values_at_knots(), 1.0, rtol=0.0, atol=1e-10)


def test_derivative_of_constant_is_zero(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.full(len(p), 2.0))
    d = fractal_derivative_function(f, curve, staircase)
    assert np.allclose(d.values_at_knots(), 0.0, atol=1e-11)


def test_derivative_of_squared_coordinate(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, lambda y: y * y)
    k = int(np.argmin(np.abs(staircase.values - 0.4)))
    theta = curve.points[k]
    d = fractal_derivative(f, theta, curve, staircase)
    # central difference of y^2 on the uniform conjugate grid is exact at
    # the chosen knot; against 0.8 the knot-snap offset dominates
    y_k = staircase.values[k]
    assert abs(d - 2.0 * y_k) < 1e-12
    dy = staircase.total / (curve.knot_count - 1)
    assert abs(d - 0.8) < 2.0 * dy


def test_derivative_commutes_with_conjugation(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, np.sin)
    left = to_conjugate(fractal_derivative_function(f, curve, staircase),
                        curve, staircase)
    right = grid_derivative(to_conjugate(f, curve, staircase))
    assert np.array_equal(left.values, right.values)


def test_derivative_and_integral_are_linear(koch):
    curve, staircase = koch
    rng = np.random.default_rng(3)
    va = rng.normal(size=curve.knot_count)
    vb = rng.normal(size=curve.knot_count)
    fa = CurveFunction(curve=curve, knot_values=va)
    fb = CurveFunction(curve=curve, knot_values=vb)
    fc = CurveFunction(curve=curve, knot_values=2.0 * va - 3.0 * vb)
    da = fractal_derivative_function(fa, curve, staircase).values_at_knots()
    db = fractal_derivative_function(fb, curve, staircase).values_at_knots()
    dc = fractal_derivative_function(fc, curve, staircase).values_at_knots()
    scale = np.max(np.abs(dc))
    assert np.allclose(dc, 2.0 * da - 3.0 * db, rtol=0.0, atol=1e-12 * scale)
    ia = fractal_integral(fa, 0.0, 1.0, curve, staircase)
    ib = fractal_integral(fb, 0.0, 1.0, curve, staircase)
    ic = fractal_integral(fc, 0.0, 1.0, curve, staircase)
    assert abs(ic - (2.0 * ia - 3.0 * ib)) < 1e-12


def test_integral_of_one_is_total_mass(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.ones(len(p)))
    got = fractal_integral(f, 0.0, 1.0, curve, staircase)
    assert abs(got - KOCH_MASS) < 1e-12


def test_integral_of_coordinate(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, lambda y: y)
    got = fractal_integral(f, 0.0, 1.0, curve, staircase)
    # integral of y over [0, Y] is Y^2/2; midpoint rule is exact for linear g
    assert abs(got - KOCH_MASS ** 2 / 2.0) < 1e-12


def test_integral_degenerate_range(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.ones(len(p)))
    with pytest.raises(ValidationError):
        fractal_integral(f, 0.5, 0.5, curve, staircase)
    with pytest.raises(ValidationError):
        fractal_integral(f, 0.8, 0.2, curve, staircase)


def test_integral_snaps_non_knot_endpoints(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.ones(len(p)))
    h = curve.spacing
    exact = fractal_integral(f, 0.25, 0.75, curve, staircase)
    nudged = fractal_integral(f, 0.25 + 0.3 * h, 0.75 - 0.3 * h, curve, staircase)
    assert nudged == exact  # snapped outward to the same knots


def test_fundamental_theorem_integral_of_derivative(koch):
    curve, staircase = koch
    for level in (6, 7):
        curve_m = curve if level == 6 else build_curve(koch_generator(), level=7)
        st = staircase if level == 6 else build_staircase(curve_m)
        f = _conjugate_samples(curve_m, st, np.exp)
        df = fractal_derivative_function(f, curve_m, st)
        got = fractal_integral(df, 0.0, 1.0, curve_m, st)
        want = math.exp(st.total) - 1.0
        assert abs(got - want) < 1e-6


def test_fundamental_theorem_derivative_of_running_integral(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, np.cos)
    acc = running_integral(f, curve, staircase)
    rec = fractal_derivative_function(acc, curve, staircase).values_at_knots()
    # O(mesh) recovery; interior is much better than the ends
    err = np.max(np.abs(rec - f.values_at_knots()))
    assert err < 1e-6


def test_running_integral_endpoint_matches_integral(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, np.exp)
    acc = running_integral(f, curve, staircase).values_at_knots()
    assert acc[0] == 0.0
    total = fractal_integral(f, 0.0, 1.0, curve, staircase)
    assert abs(acc[-1] - total) < 1e-14


def test_taylor_polynomial_terminates(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, lambda y: y * y)
    base = curve.start()
    target = point_at_conjugate(staircase, curve, 0.5)
    got = taylor_eval(f, base, target, order=2, curve=curve, staircase=staircase)
    assert abs(got - 0.25) < 1e-12


def test_taylor_constant_any_order(koch):
    curve, staircase = koch
    f = CurveFunction(curve=curve, rule=lambda p: np.full(len(p), 4.25))
    base = point_at_conjugate(staircase, curve, 0.3)
    target = point_at_conjugate(staircase, curve, 0.7)
    for order in (0, 1, 4):
        got = taylor_eval(f, base, target, order=order,
                          curve=curve, staircase=staircase)
        assert got == 4.25


def test_taylor_exponential_order6(koch):
    curve, staircase = koch
    f = _conjugate_samples(curve, staircase, np.exp)
    base = curve.start()
    target = point_at_conjugate(staircase, curve, 0.3)
    got = taylor_eval(f, base, target, order=6, curve=curve, staircase=staircase)
    assert abs(got - math.exp(0.3)) < 1e-5


def test_taylor_rejects_unsupported_order():
    curve = build_curve(koch_generator(), level=1)
    staircase = build_staircase(curve)
    f = CurveFunction(curve=curve, rule=lambda p: np.ones(len(p)))
    # level 1 has 5 knots; order 6 needs an 8-point stencil
    with pytest.raises(ResolutionError):
        taylor_eval(f, curve.start(), curve.end(), order=6,
                    curve=curve, staircase=staircase)


def test_derivative_noise_guard_trips(koch):
    curve, staircase = koch
    rng = np.random.default_rng(11)
    g = GridFunction(grid=staircase.values,
                     values=rng.normal(size=curve.knot_count),
                     staircase=staircase)
    with pytest.raises(ResolutionError):
        conjugate_derivatives_at(g, index=curve.knot_count // 2, order=6,
                                 noise_tol=1e-12)


def test_alpha1_reduction_matches_textbook_calculus():
    curve = build_curve(segment_generator(), level=16)
    staircase = build_staircase(curve, alpha=1.0)
    x = curve.points[:, 0]
    assert np.allclose(staircase.values, x, atol=1e-12)

    cubic = CurveFunction(curve=curve, knot_values=x ** 3)
    d = fractal_derivative_function(cubic, curve, staircase).values_at_knots()
    assert np.max(np.abs(d - 3.0 * x ** 2)) < 1e-9

    quad = CurveFunction(curve=curve, knot_values=x ** 2)
    dq = fractal_derivative_function(quad, curve, staircase).values_at_knots()
    assert np.max(np.abs(dq - 2.0 * x)) < 1e-9

    got = fractal_integral(quad, 0.0, 1.0, curve, staircase)
    assert abs(got - 1.0 / 3.0) < 1e-9
    got3 = fractal_integral(cubic, 0.0, 1.0, curve, staircase)
    assert abs(got3 - 0.25) < 1e-9

    t = taylor_eval(quad, curve.start(), locate(curve, 0.5), order=2,
                    curve=curve, staircase=staircase)
    assert abs(t - 0.25) < 1e-9
