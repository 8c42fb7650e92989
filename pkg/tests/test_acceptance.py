"""Acceptance suite: one test per numbered criterion, stated tolerances.

Each test prints one ACCEPTANCE PASS/FAIL line to the live terminal and
records its wall time; the final test bounds the total.
"""

import math
import time

import numpy as np
import pytest

from fractalkinetics import (
    CurveFunction,
    analytic_snapshot,
    build_curve,
    build_staircase,
    constant_field,
    density_shape_data,
    density_shape_time,
    estimate_dimension,
    fit_power_law,
    fractal_derivative_function,
    fractal_integral,
    from_conjugate,
    koch_generator,
    kramers_moyal_coefficients,
    l1_distance,
    locate,
    mass,
    msd_exponent,
    msd_series,
    msd_time_window,
    point_at_conjugate,
    propagate_chapman_kolmogorov,
    propagate_fokker_planck,
    quadratic_koch_generator,
    running_integral,
    segment_generator,
    taylor_eval,
    to_conjugate,
    transitional_moments,
    uniform_grid,
)
from fractalkinetics.cli import main

ALPHA_KOCH = 1.2618595071429148
KOCH_MASS = 0.876603109987812

_TIMES = {}


class _Criterion:
    """Times a criterion body and prints its PASS/FAIL line."""

    def __init__(self, capsys, number, name):
        self.capsys = capsys
        self.number = number
        self.name = name
        self.details = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def note(self, text):
        self.details.append(text)

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        _TIMES[self.number] = elapsed
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        with self.capsys.disabled():
            print(f"ACCEPTANCE {status} criterion {self.number} "
                  f"({self.name}): {detail} [{elapsed:.2f}s]")
        return False


def test_criterion_1_dimension_recovery(capsys):
    with _Criterion(capsys, 1, "dimension recovery") as c:
        code = main(["dim", "--curve", "koch", "--level", "8"])
        out = capsys.readouterr().out
        alpha_hat = float([ln for ln in out.splitlines()
                           if ln.startswith("alpha_hat=")][0].split("=")[1])
        err = abs(alpha_hat - ALPHA_KOCH)
        c.note(f"alpha_hat={alpha_hat:.6f} err={err:.2e} (tol 5e-3)")
        assert code == 0
        assert err < 0.005
        assert _elapsed(c) < 10.0


def _elapsed(c):
    return time.perf_counter() - c.t0


def test_criterion_2_density_shape_slope(capsys):
    with _Criterion(capsys, 2, "density-shape slope") as c:
        curve = build_curve(koch_generator(), level=7)
        staircase = build_staircase(curve)
        t = density_shape_time(0.25)
        lx, ly = density_shape_data(t, 0.25, curve, staircase)
        fit = fit_power_law(lx, ly, already_log=True)
        c.note(f"slope={fit.slope:.4f} in [2.39, 2.62], "
               f"r2={fit.r_squared:.5f} >= 0.98")
        assert 2.39 <= fit.slope <= 2.62
        assert fit.r_squared >= 0.98
        assert _elapsed(c) < 30.0


def test_criterion_3_msd_exponent(capsys):
    with _Criterion(capsys, 3, "MSD exponent") as c:
        curve = build_curve(koch_generator(), level=7)
        staircase = build_staircase(curve)
        times = msd_time_window(0.25, staircase, decades=1.5, count=24)
        fit = msd_exponent(msd_series(times, 0.25, curve, staircase))
        c.note(f"mu={fit.slope:.4f} in [0.77, 0.83], "
               f"r2={fit.r_squared:.5f} >= 0.98")
        assert 0.77 <= fit.slope <= 0.83
        assert fit.r_squared >= 0.98
        assert _elapsed(c) < 60.0


def test_criterion_4_gaussian_moment_identities(capsys):
    with _Criterion(capsys, 4, "gaussian moment identities") as c:
        from fractalkinetics import gaussian_kernel
        worst_m1 = worst_m2 = worst_a1 = worst_a2 = 0.0
        for tau in (1e-3, 1e-2, 1e-1):
            ms = kramers_moyal_coefficients(gaussian_kernel(tau), 0.0, 2,
                                            (-8.0, 8.0))
            worst_m1 = max(worst_m1, abs(ms.moments[1]))
            worst_m2 = max(worst_m2,
                           abs(ms.moments[2] - tau / 2.0) / (tau / 2.0))
            worst_a1 = max(worst_a1, abs(ms.coefficients[1]))
            worst_a2 = max(worst_a2, abs(ms.coefficients[2] - 0.25) / 0.25)
        c.note(f"|M1|<={worst_m1:.1e} (tol 1e-10), "
               f"relerr M2<={worst_m2:.1e} (tol 1e-8), "
               f"|A1|<={worst_a1:.1e}, relerr A2<={worst_a2:.1e}")
        assert worst_m1 < 1e-10
        assert worst_m2 < 1e-8
        assert worst_a1 < 1e-10
        assert worst_a2 < 1e-8


def test_criterion_5_solver_cross_validation(capsys):
    with _Criterion(capsys, 5, "solver cross-validation") as c:
        # pde convention: the stepped operators solve dV/dt = A d2V/dy2
        grid = uniform_grid(-4.0, 4.0, 2048)
        targets = [0.2, 0.3, 0.4, 0.5]
        seed = analytic_snapshot(grid, t=0.1, diffusion=0.25, convention="pde")
        ana = [analytic_snapshot(grid, t=t, diffusion=0.25, convention="pde")
               for t in targets]
        ck = propagate_chapman_kolmogorov(seed, targets, diffusion=0.25)
        fp = propagate_fokker_planck(seed, constant_field(grid, 0.0),
                                     constant_field(grid, 0.25), targets)
        worst = 0.0
        for va, vc, vf in zip(ana, ck, fp):
            worst = max(worst, l1_distance(va, vc), l1_distance(va, vf),
                        l1_distance(vc, vf))
        c.note(f"max pairwise L1={worst:.2e} (tol 1e-3) on 2048-point grid, "
               f"t in [0.1, 0.5], pde convention")
        assert worst < 1e-3


def test_criterion_6_calculus_property_suite(capsys):
    with _Criterion(capsys, 6, "calculus property suite") as c:
        curve = build_curve(koch_generator(), level=6)
        staircase = build_staircase(curve)

        f = CurveFunction(curve=curve,
                          knot_values=np.exp(staircase.values))
        df = fractal_derivative_function(f, curve, staircase)
        ft1 = abs(fractal_integral(df, 0.0, 1.0, curve, staircase)
                  - (math.exp(staircase.total) - 1.0))
        acc = running_integral(f, curve, staircase)
        rec = fractal_derivative_function(acc, curve, staircase)
        ft2 = float(np.max(np.abs(rec.values_at_knots()
                                  - f.values_at_knots())))

        g = to_conjugate(f, curve, staircase)
        back = from_conjugate(g, curve, staircase)
        bit_identical = np.array_equal(back.values_at_knots(),
                                       f.values_at_knots())

        seg = build_curve(segment_generator(), level=16)
        seg_st = build_staircase(seg, alpha=1.0)
        x = seg.points[:, 0]
        cubic = CurveFunction(curve=seg, knot_values=x ** 3)
        d3 = fractal_derivative_function(cubic, seg, seg_st).values_at_knots()
        alpha1 = float(np.max(np.abs(d3 - 3.0 * x ** 2)))
        alpha1 = max(alpha1, abs(fractal_integral(
            cubic, 0.0, 1.0, seg, seg_st) - 0.25))
        quad_seg = CurveFunction(curve=seg, knot_values=x ** 2)
        alpha1 = max(alpha1, abs(fractal_integral(
            quad_seg, 0.0, 1.0, seg, seg_st) - 1.0 / 3.0))

        quad = CurveFunction(curve=curve, knot_values=staircase.values ** 2)
        target = point_at_conjugate(staircase, curve, 0.5)
        taylor_err = abs(taylor_eval(quad, curve.start(), target, order=2,
                                     curve=curve, staircase=staircase) - 0.25)

        c.note(f"fundamental theorem {max(ft1, ft2):.1e} (tol 1e-6); "
               f"conjugacy bit-identical={bit_identical}; "
               f"alpha=1 reduction {alpha1:.1e} (tol 1e-9); "
               f"quadratic Taylor terminates {taylor_err:.1e}")
        assert ft1 < 1e-6 and ft2 < 1e-6
        assert bit_identical
        assert alpha1 < 1e-9
        assert taylor_err < 1e-12


def test_criterion_7_self_similar_mass_law(capsys):
    with _Criterion(capsys, 7, "self-similar mass law") as c:
        curve = build_curve(koch_generator(), level=8)
        est = mass(curve, alpha=ALPHA_KOCH)
        sums = np.array([s for _, s in est.level_values])
        spread = float(np.ptp(sums) / sums.mean())
        gamma_err = float(np.max(np.abs(sums - KOCH_MASS)) / KOCH_MASS)
        c.note(f"levels 0..8 relative spread={spread:.1e} (tol 1e-12), "
               f"vs 1/Gamma(1+alpha)={KOCH_MASS}: relerr={gamma_err:.1e}")
        assert spread < 1e-12
        assert gamma_err < 1e-12
        assert abs(KOCH_MASS - 1.0 / math.gamma(1.0 + ALPHA_KOCH)) < 1e-14


def test_criterion_8_quadratic_koch_generalization(capsys):
    with _Criterion(capsys, 8, "quadratic Koch generalization") as c:
        curve = build_curve(quadratic_koch_generator(), level=4)
        est = estimate_dimension(curve, 1.0, 2.0, tol=1e-3)
        dim_err = abs(est.alpha_hat - 1.5)

        # 2.0-decade window: spans one full lacunarity log-period (ln 64)
        mus = []
        for level in (5, 6):
            cm = build_curve(quadratic_koch_generator(), level=level)
            sm = build_staircase(cm)
            times = msd_time_window(0.25, sm, decades=2.0, count=24)
            mus.append(msd_exponent(msd_series(times, 0.25, cm, sm)).slope)
        mu_err = abs(mus[0] - 2.0 / 3.0)
        c.note(f"alpha_hat={est.alpha_hat:.6f} err={dim_err:.1e} (tol 5e-3); "
               f"mu={mus[0]:.4f} err={mu_err:.3f} (tol 0.03); "
               f"level 5->6 drift={abs(mus[1] - mus[0]):.4f}")
        assert dim_err < 0.005
        assert mu_err < 0.03
        assert abs(mus[1] - mus[0]) < 0.01


def test_total_runtime_bound(capsys):
    total = sum(_TIMES.values())
    with capsys.disabled():
        print(f"ACCEPTANCE total runtime {total:.1f}s (bound 300s) "
              f"across {len(_TIMES)} criteria")
    assert len(_TIMES) == 8
    assert total < 300.0
