"""Mass function, dimension estimator, staircase, and conjugate coordinate."""

import math

import numpy as np
import pytest

from fractalkinetics import (
    AmbiguousScalingError,
    ValidationError,
    build_curve,
    build_staircase,
    conjugate_coordinate,
    estimate_dimension,
    identity_generator,
    koch_generator,
    locate,
    mass,
    point_at_conjugate,
    quadratic_koch_generator,
    random_refinement_sum,
    segment_generator,
)

# closed forms, frozen: log4/log3 and 1/Gamma(1+log4/log3)
ALPHA_KOCH = 1.2618595071429148
KOCH_MASS = 0.876603109987812
# per-level decay factor of the Koch vertex sums at alpha = 1.5
KOCH_DECAY_15 = 0.7698003589195010


@pytest.fixture(scope="module")
def koch6():
    return build_curve(koch_generator(), level=6)


@pytest.fixture(scope="module")
def seg6():
    return build_curve(segment_generator(), level=6)


def test_frozen_constants_match_closed_forms():
    assert abs(ALPHA_KOCH - math.log(4.0) / math.log(3.0)) < 1e-15
    assert abs(KOCH_MASS - 1.0 / math.gamma(1.0 + ALPHA_KOCH)) < 1e-14
    assert abs(KOCH_DECAY_15 - 4.0 * 3.0 ** -1.5) < 1e-15


def test_segment_alpha1_mass_is_length(seg6):
    est = mass(seg6, alpha=1.0)
    assert abs(est.value - 1.0) < 1e-12
    assert est.classification == "flat"


def test_koch_mass_flat_and_equals_inverse_gamma(koch6):
    est = mass(koch6, alpha=ALPHA_KOCH)
    sums = [s for _, s in est.level_values]
    for s in sums:
        assert abs(s - KOCH_MASS) < 1e-12 * KOCH_MASS
    assert abs(est.value - KOCH_MASS) < 1e-12 * KOCH_MASS
    assert est.classification == "flat"
    assert est.gamma_norm == pytest.approx(math.gamma(1.0 + ALPHA_KOCH), rel=1e-14)


def test_koch_mass_growth_below_dimension(koch6):
    est = mass(koch6, alpha=1.0)
    sums = np.array([s for _, s in est.level_values])
    ratios = sums[1:] / sums[:-1]
    assert est.classification == "growing"
    assert np.allclose(ratios, 4.0 / 3.0, rtol=1e-12)


def test_koch_mass_decay_above_dimension(koch6):
    est = mass(koch6, alpha=1.5)
    sums = np.array([s for _, s in est.level_values])
    ratios = sums[1:] / sums[:-1]
    assert est.classification == "decaying"
    assert np.allclose(ratios, KOCH_DECAY_15, rtol=1e-12)
    assert est.extrapolated == 0.0


def test_koch_mass_decay_alpha2(koch6):
    est = mass(koch6, alpha=2.0)
    sums = np.array([s for _, s in est.level_values])
    ratios = sums[1:] / sums[:-1]
    assert np.allclose(ratios, 4.0 / 9.0, rtol=1e-12)


def test_mass_rejects_bad_arguments(koch6):
    with pytest.raises(ValidationError):
        mass(koch6, alpha=0.5)
    with pytest.raises(ValidationError):
        mass(koch6, alpha=ALPHA_KOCH, a=0.5, b=0.5)
    with pytest.raises(ValidationError):
        mass(koch6, alpha=ALPHA_KOCH, max_level=7)


def test_mass_additivity(koch6):
    a, b, c = 0.0, 0.25, 1.0  # both knot-aligned at every level
    left = mass(koch6, alpha=ALPHA_KOCH, a=a, b=b).value
    right = mass(koch6, alpha=ALPHA_KOCH, a=b, b=c).value
    whole = mass(koch6, alpha=ALPHA_KOCH, a=a, b=c).value
    assert abs(left + right - whole) < 1e-10 * whole


def test_mass_endpoint_snapping(koch6):
    est = mass(koch6, alpha=ALPHA_KOCH, a=0.1, b=0.9)
    lo, hi = est.snapped_interval
    assert lo <= 0.1 and hi >= 0.9
    # final-level snap lands within one knot spacing of the request
    assert 0.1 - lo <= koch6.spacing and hi - 0.9 <= koch6.spacing
    # the reported maximum is dominated by the coarsest level (knots {0, 1})
    assert est.max_snap_distance == pytest.approx(0.1, abs=1e-15)


def test_random_refinement_sums_match_uniform(koch6):
    uniform = mass(koch6, alpha=ALPHA_KOCH).value
    rng = np.random.default_rng(0)
    for _ in range(20):
        probe = random_refinement_sum(koch6, ALPHA_KOCH, mesh_level=3, rng=rng)
        assert probe >= uniform * (1.0 - 1e-9)
        assert abs(probe - uniform) < 1e-10 * uniform


def test_dimension_estimate_koch():
    curve = build_curve(koch_generator(), level=8)
    est = estimate_dimension(curve, 1.0, 2.0, tol=1e-3)
    assert abs(est.alpha_hat - ALPHA_KOCH) < 2e-3
    lo, hi = est.bracket
    assert lo < est.alpha_hat < hi
    assert est.alpha_hat >= 1.0
    labels = {label for _, _, label in est.growth_diagnostics}
    assert "growing" in labels and "decaying" in labels


def test_dimension_estimate_quadratic_koch_exact():
    curve = build_curve(quadratic_koch_generator(), level=4)
    est = estimate_dimension(curve, 1.0, 2.0, tol=1e-3)
    # bisection midpoints hit 1.5 exactly
    assert est.alpha_hat == 1.5


def test_dimension_estimate_segment(seg6):
    est = estimate_dimension(seg6, 1.0, 2.0, tol=1e-3)
    assert abs(est.alpha_hat - 1.0) < 2e-3


def test_dimension_estimator_family():
    cases = [
        (koch_generator(), 6, math.log(4.0) / math.log(3.0)),
        (quadratic_koch_generator(), 4, 1.5),
        (segment_generator(), 8, 1.0),
    ]
    for gen, level, alpha in cases:
        curve = build_curve(gen, level=level)
        est = estimate_dimension(curve, 1.0, 2.0, tol=1e-3)
        assert abs(est.alpha_hat - alpha) < 2e-3


def test_dimension_ambiguous_on_identity():
    curve = build_curve(identity_generator(), level=5)
    with pytest.raises(AmbiguousScalingError):
        estimate_dimension(curve, 1.0, 2.0, tol=1e-3)


def test_dimension_bad_bracket(koch6):
    # decaying at both ends: no transition inside the bracket
    with pytest.raises(ValidationError):
        estimate_dimension(koch6, 1.4, 2.0, tol=1e-3)


def test_staircase_affine_for_koch(koch6):
    table = build_staircase(koch6)
    expected = koch6.params * (KOCH_MASS / (koch6.b0 - koch6.a0))
    assert np.allclose(table.values, expected, rtol=1e-12, atol=1e-15)
    assert table.values[0] == 0.0
    assert abs(table.total - KOCH_MASS) < 1e-12


def test_staircase_segment_identity(seg6):
    table = build_staircase(seg6, alpha=1.0)
    assert np.allclose(table.values, seg6.params, rtol=0.0, atol=1e-15)


def test_staircase_strictly_increasing(koch6):
    table = build_staircase(koch6)
    assert np.all(np.diff(table.values) > 0.0)


def test_staircase_rejects_wrong_alpha(koch6):
    with pytest.raises(ValidationError):
        build_staircase(koch6, alpha=1.9)


def test_staircase_additivity_matches_mass(koch6):
    table = build_staircase(koch6)
    a, b = 0.25, 0.75
    ia = int(round((a - koch6.a0) / koch6.spacing))
    ib = int(round((b - koch6.a0) / koch6.spacing))
    seg = table.values[ib] - table.values[ia]
    est = mass(koch6, alpha=ALPHA_KOCH, a=a, b=b).value
    assert abs(seg - est) < 1e-10 * est


def test_staircase_value_parameter_round_trip(koch6):
    table = build_staircase(koch6)
    for u in (0.0, 0.125, 0.5, 0.8125, 1.0):
        s = table.value_at(u)
        assert abs(table.parameter_at(s) - u) < 1e-12


def test_conjugate_coordinate_endpoints_and_apex(koch6):
    table = build_staircase(koch6)
    start = conjugate_coordinate(table, koch6, koch6.start())
    end = conjugate_coordinate(table, koch6, koch6.end())
    apex = conjugate_coordinate(table, koch6, locate(koch6, 0.5))
    assert start == 0.0
    assert abs(end - KOCH_MASS) < 1e-12
    assert abs(apex - KOCH_MASS / 2.0) < 1e-12


def test_point_at_conjugate_round_trip(koch6):
    table = build_staircase(koch6)
    for u in (0.0, 0.3125, 0.5, 1.0):
        theta = locate(koch6, u)
        y = conjugate_coordinate(table, koch6, theta)
        back = point_at_conjugate(table, koch6, y)
        assert np.allclose(back, theta, atol=1e-12)


def test_point_at_conjugate_out_of_range(koch6):
    table = build_staircase(koch6)
    with pytest.raises(ValidationError):
        point_at_conjugate(table, koch6, -1e-6)
    with pytest.raises(ValidationError):
        point_at_conjugate(table, koch6, table.total + 1e-6)
