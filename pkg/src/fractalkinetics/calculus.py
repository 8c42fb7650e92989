"""Derivatives, integrals, and Taylor expansion along a fractal curve.

Everything is computed in the conjugate coordinate y = S(u): a function on
the curve is conjugate to an ordinary function on the staircase image, the
curve derivative is a finite difference on that (generally nonuniform)
grid, and the curve integral is a midpoint Riemann sum against the
staircase increments. Keeping one shared stencil implementation makes the
curve-side and grid-side derivative agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import FractalCurve, invert
from .errors import ResolutionError, ValidationError
from .mass import StaircaseTable, conjugate_coordinate

EPS = float(np.finfo(float).eps)


@dataclass
class GridFunction:
    """Samples on a strictly increasing conjugate grid."""

    grid: np.ndarray
    values: np.ndarray
    staircase: StaircaseTable | None = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValidationError("grid and values must be matching 1-d arrays")
        if np.any(np.diff(g) <= 0.0):
            raise ValidationError("grid must be strictly increasing")
        self.grid = g
        self.values = v


@dataclass
class CurveFunction:
    """A real function on the curve, as a vectorized rule or knot samples.

    rule, when given, receives an (M, 2) array of points and returns (M,)
    values. Sample-based functions are linear in the conjugate coordinate
    between knots, so their midpoint value is the average of the endpoints.
    """

    curve: FractalCurve
    rule: object | None = None
    knot_values: np.ndarray | None = None

    def __post_init__(self):
        if (self.rule is None) == (self.knot_values is None):
            raise ValidationError("provide exactly one of rule or knot_values")
        if self.knot_values is not None:
            v = np.asarray(self.knot_values, dtype=float)
            if v.shape != (self.curve.knot_count,):
                raise ValidationError(
                    f"knot_values must have shape ({self.curve.knot_count},)")
            self.knot_values = v

    def values_at_knots(self) -> np.ndarray:
        if self.knot_values is not None:
            return self.knot_values
        return np.asarray(self.rule(self.curve.points), dtype=float)

    def values_at_midpoints(self) -> np.ndarray:
        """Values at the chord midpoints (the u-interval midpoints)."""
        if self.rule is not None:
            mids = 0.5 * (self.curve.points[:-1] + self.curve.points[1:])
            return np.asarray(self.rule(mids), dtype=float)
        v = self.knot_values
        return 0.5 * (v[:-1] + v[1:])


def to_conjugate(f: CurveFunction, curve: FractalCurve,
                 staircase: StaircaseTable) -> GridFunction:
    """Conjugate image: samples of f at the knots, on the staircase grid."""
    _check_same_curve(f, curve, staircase)
    return GridFunction(grid=staircase.values, values=f.values_at_knots(),
                        staircase=staircase)


def from_conjugate(g: GridFunction, curve: FractalCurve,
                   staircase: StaircaseTable) -> CurveFunction:
    """Inverse conjugation; exact (the same samples, reattached to the curve)."""
    if g.grid.shape != staircase.values.shape or not np.array_equal(g.grid, staircase.values):
        raise ValidationError("grid function does not live on this staircase's grid")
    return CurveFunction(curve=curve, knot_values=g.values)


def _check_same_curve(f: CurveFunction, curve: FractalCurve,
                      staircase: StaircaseTable) -> None:
    if f.curve is not curve and f.curve.knot_count != curve.knot_count:
        raise ValidationError("curve function built on a different refinement")
    if len(staircase.knots) != curve.knot_count:
        raise ValidationError("staircase built on a different refinement")


def grid_derivative(g: GridFunction) -> GridFunction:
    """First derivative on the grid: 3-point stencils with exact weights for
    unequal spacing, one-sided at the ends."""
    y = g.grid
    v = g.values
    k = len(y)
    if k < 2:
        raise ResolutionError("need at least two grid points to differentiate")
    out = np.empty_like(v)
    if k == 2:
        out[:] = (v[1] - v[0]) / (y[1] - y[0])
        return GridFunction(grid=y, values=out, staircase=g.staircase)
    h1 = y[1:-1] - y[:-2]
    h2 = y[2:] - y[1:-1]
    out[1:-1] = (-h2 / (h1 * (h1 + h2)) * v[:-2]
                 + (h2 - h1) / (h1 * h2) * v[1:-1]
                 + h1 / (h2 * (h1 + h2)) * v[2:])
    # one-sided 3-point stencils at the ends (second order)
    a, b, c = y[0], y[1], y[2]
    out[0] = (v[0] * (2 * a - b - c) / ((a - b) * (a - c))
              + v[1] * (a - c) / ((b - a) * (b - c))
              + v[2] * (a - b) / ((c - a) * (c - b)))
    a, b, c = y[-3], y[-2], y[-1]
    out[-1] = (v[-3] * (c - b) / ((a - b) * (a - c))
               + v[-2] * (c - a) / ((b - a) * (b - c))
               + v[-1] * (2 * c - a - b) / ((c - a) * (c - b)))
    return GridFunction(grid=y, values=out, staircase=g.staircase)


def _nearest_knot(curve: FractalCurve, staircase: StaircaseTable, theta) -> int:
    u = invert(curve, theta)
    k = int(round((u - curve.a0) / curve.spacing))
    return min(max(k, 0), curve.knot_count - 1)


def fractal_derivative_function(f: CurveFunction, curve: FractalCurve,
                                staircase: StaircaseTable) -> CurveFunction:
    """The derivative as a curve function (samples at every knot)."""
    g = to_conjugate(f, curve, staircase)
    return from_conjugate(grid_derivative(g), curve, staircase)


def fractal_derivative(f: CurveFunction, theta, curve: FractalCurve,
                       staircase: StaircaseTable) -> float:
    """Curve derivative of f at the knot nearest theta.

    Shares its stencil with grid_derivative, so conjugation and
    differentiation commute exactly.
    """
    k = _nearest_knot(curve, staircase, theta)
    g = to_conjugate(f, curve, staircase)
    return float(grid_derivative(g).values[k])


def _snap_indices(curve: FractalCurve, a: float, b: float) -> tuple:
    if not (curve.a0 <= a < b <= curve.b0):
        raise ValidationError(f"need a0 <= a < b <= b0, got [{a}, {b}]")
    h = curve.spacing
    ia = int(np.floor((a - curve.a0) / h))
    ib = int(np.ceil((b - curve.a0) / h))
    ia = min(max(ia, 0), curve.knot_count - 2)
    ib = min(max(ib, ia + 1), curve.knot_count - 1)
    return ia, ib


def fractal_integral(f: CurveFunction, a: float, b: float, curve: FractalCurve,
                     staircase: StaircaseTable) -> float:
    """Midpoint Riemann sum of f against the staircase increments on [a, b].

    Non-knot endpoints are snapped outward to the bracketing knots.
    """
    _check_same_curve(f, curve, staircase)
    ia, ib = _snap_indices(curve, float(a), float(b))
    mids = f.values_at_midpoints()[ia:ib]
    steps = np.diff(staircase.values)[ia:ib]
    return float(np.sum(mids * steps))


def running_integral(f: CurveFunction, curve: FractalCurve,
                     staircase: StaircaseTable) -> CurveFunction:
    """Cumulative integral from the curve start, sampled at the knots."""
    _check_same_curve(f, curve, staircase)
    mids = f.values_at_midpoints()
    steps = np.diff(staircase.values)
    acc = np.concatenate([[0.0], np.cumsum(mids * steps)])
    return CurveFunction(curve=curve, knot_values=acc)


def _fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for derivatives 0..m at z on nodes x.

    Fornberg's recursion; exact for arbitrary node placement.
    """
    n = len(x)
    c = np.zeros((m + 1, n))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def conjugate_derivatives_at(g: GridFunction, index: int, order: int,
                             noise_tol: float = 1e-3) -> np.ndarray:
    """Estimated conjugate derivatives 0..order of g at grid node `index`.

    Each derivative n uses a stencil of n+2 nodes subsampled with a stride
    that balances stencil roundoff against truncation. The guard converts
    the roundoff estimate eps*max|g-g_center|*sum|w| into its worst-case
    Taylor-term contribution over the grid span and errors out when that
    exceeds noise_tol * max(1, max|g|): the grid cannot support that order.
    """
    y = g.grid
    v = g.values
    kk = len(y)
    span = float(y[-1] - y[0])
    gmax = float(np.max(np.abs(v))) or 1.0
    dy_med = float(np.median(np.diff(y)))
    out = np.empty(order + 1)
    out[0] = v[index]
    scale = noise_tol * max(1.0, gmax)
    fact = 1.0
    for n in range(1, order + 1):
        fact *= n
        npts = n + 2
        if npts > kk:
            raise ResolutionError(
                f"order-{n} derivative needs {npts} grid points, have {kk}")
        h_star = span * EPS ** (1.0 / (n + 2))
        stride = max(1, int(round(h_star / dy_med)))
        while stride > 1 and (npts - 1) * stride >= kk:
            stride -= 1
        half = (npts - 1) // 2
        first = index - half * stride
        first = min(max(first, 0), kk - 1 - (npts - 1) * stride)
        idx = first + stride * np.arange(npts)
        w = _fornberg_weights(float(y[index]), y[idx], n)[n]
        # weights of any n >= 1 stencil annihilate constants, so apply them
        # to center-shifted values: kills the eps*|g|*sum|w| cancellation
        shifted = v[idx] - v[index]
        deriv = float(w @ shifted)
        local = float(np.max(np.abs(shifted)))
        noise = EPS * local * float(np.sum(np.abs(w)))
        if noise * span ** n / fact > scale:
            raise ResolutionError(
                f"grid resolution does not support derivative order {n}: "
                f"stencil noise estimate {noise:.3e} is too large")
        out[n] = deriv
    return out


def taylor_eval(f: CurveFunction, theta_base, theta, order: int,
                curve: FractalCurve, staircase: StaircaseTable,
                noise_tol: float = 1e-3) -> float:
    """Partial Taylor sum sum_n (y - y0)^n / n! * (D^n f)(base).

    The base point snaps to its nearest knot; the target does not.
    """
    if order < 0 or int(order) != order:
        raise ValidationError("order must be a non-negative integer")
    _check_same_curve(f, curve, staircase)
    k0 = _nearest_knot(curve, staircase, theta_base)
    g = to_conjugate(f, curve, staircase)
    derivs = conjugate_derivatives_at(g, k0, order, noise_tol=noise_tol)
    y0 = float(staircase.values[k0])
    y = conjugate_coordinate(staircase, curve, theta)
    delta = y - y0
    total = 0.0
    fact = 1.0
    for n in range(order + 1):
        if n > 0:
            fact *= n
        total += derivs[n] * delta ** n / fact
    return float(total)
