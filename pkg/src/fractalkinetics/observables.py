"""Scaling observables of the spreading density.

Two diagnostics characterize transport on a self-similar curve: the shape
of the density profile against Euclidean distance from the source, and the
growth of the mean squared Euclidean displacement with time. Both reduce
to straight lines in log-log coordinates, fitted by ordinary least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import FractalCurve
from .errors import TimeRangeError, ValidationError
from .kinetics import _variance, diffusion_density
from .mass import StaircaseTable

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    fit_range: tuple
    point_count: int


@dataclass(frozen=True)
class MsdSeries:
    """Mean squared Euclidean displacement at each requested time."""

    times: np.ndarray
    msd: np.ndarray
    convention: str = "gauss"


def fit_power_law(x, y, fit_range=None, already_log: bool = False) -> PowerLawFit:
    """Least-squares line through (log x, log y), or through (x, y) as
    given when already_log is set. fit_range filters on the abscissa as
    passed in. Exactly flat data fits slope 0 with r^2 = 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be matching 1-d arrays")
    if fit_range is not None:
        lo, hi = float(fit_range[0]), float(fit_range[1])
        keep = (x >= lo) & (x <= hi)
        x, y = x[keep], y[keep]
    if len(x) < MIN_FIT_POINTS:
        raise ValidationError(f"need at least {MIN_FIT_POINTS} points to fit, "
                              f"got {len(x)}")
    if not already_log:
        if np.any(x <= 0.0) or np.any(y <= 0.0):
            raise ValidationError("power-law fitting needs positive data; "
                                  "pass already_log=True for logged inputs")
        x, y = np.log(x), np.log(y)
    if float(np.ptp(x)) == 0.0:
        raise ValidationError("degenerate abscissa: zero variance")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return PowerLawFit(slope=float(slope), intercept=float(intercept),
                       r_squared=r2, fit_range=(float(x.min()), float(x.max())),
                       point_count=len(x))


def _midpoint_samples(curve: FractalCurve, staircase: StaircaseTable):
    """Chord midpoints, their Euclidean distance from the curve start, and
    their conjugate coordinates."""
    pts = curve.points
    mids = 0.5 * (pts[:-1] + pts[1:])
    start = pts[0]
    dist = np.sqrt(np.sum((mids - start) ** 2, axis=1))
    y_mid = 0.5 * (staircase.values[:-1] + staircase.values[1:])
    return mids, dist, y_mid


def density_shape_time(diffusion: float) -> float:
    """Observation time at which the closed-form prefactor equals one, so
    the density is a pure decaying exponential in y^2 and the profile's
    log-log shape is uncontaminated by the normalization constant."""
    if diffusion <= 0.0:
        raise ValidationError("diffusion must be positive")
    return 1.0 / (2.0 * math.pi * diffusion)


def density_shape_data(t: float, diffusion: float, curve: FractalCurve,
                       staircase: StaircaseTable, convention: str = "gauss",
                       exclusion: float = 1e-3):
    """Pairs (log |theta|, log |log V|) over chord midpoints.

    |theta| is Euclidean distance from the curve start (the source); V is
    the closed-form density at the midpoint's conjugate coordinate. Points
    with |log V| < exclusion (V near 1, where the outer log blows up) and
    underflowed points are dropped. Returns two arrays sorted by abscissa.
    """
    if t <= 0.0 or diffusion <= 0.0:
        raise ValidationError("t and diffusion must be positive")
    _, dist, y_mid = _midpoint_samples(curve, staircase)
    v = diffusion_density(y_mid, t, diffusion, convention)
    log_v = np.full_like(v, -np.inf)
    ok = v > 1e-300
    log_v[ok] = np.log(v[ok])
    keep = ok & (np.abs(log_v) >= exclusion) & (dist > 0.0)
    if int(keep.sum()) < MIN_FIT_POINTS:
        raise ValidationError("fewer than 5 usable points after exclusions")
    lt = np.log(dist[keep])
    llv = np.log(np.abs(log_v[keep]))
    order = np.argsort(lt)
    return lt[order], llv[order]


def max_admissible_time(diffusion: float, staircase: StaircaseTable,
                        convention: str = "gauss") -> float:
    """Largest t whose kernel width stays within a third of the conjugate
    span, the boundary guard for displacement statistics."""
    span = staircase.total
    width_cap = span / 3.0
    # invert width(t) = sqrt(variance(t)) = width_cap
    return width_cap ** 2 / _variance(1.0, diffusion, convention)


def msd_series(times, diffusion: float, curve: FractalCurve,
               staircase: StaircaseTable, convention: str = "gauss") -> MsdSeries:
    """Mean squared Euclidean displacement <L^2>(t) = int L^2 V dy.

    L is the distance from the curve start; the integral runs one-sidedly
    over the curve's conjugate range [0, total mass] by the midpoint rule
    on the staircase increments. The kernel width at the largest t must
    stay below a third of the conjugate span.
    """
    times = np.asarray(sorted(float(t) for t in times))
    if len(times) == 0 or times[0] <= 0.0:
        raise ValidationError("need positive times")
    t_cap = max_admissible_time(diffusion, staircase, convention)
    if times[-1] > t_cap:
        raise TimeRangeError(
            f"t={times[-1]:g} puts the kernel width past a third of the "
            f"conjugate span; max admissible t = {t_cap:.6g}",
            max_admissible=t_cap)
    _, dist, y_mid = _midpoint_samples(curve, staircase)
    dy = np.diff(staircase.values)
    l2 = dist * dist
    vals = np.empty(len(times))
    for j, t in enumerate(times):
        v = diffusion_density(y_mid, t, diffusion, convention)
        vals[j] = float(np.sum(l2 * v * dy))
    return MsdSeries(times=times, msd=vals, convention=convention)


def msd_time_window(diffusion: float, staircase: StaircaseTable,
                    decades: float = 1.5, count: int = 24,
                    safety: float = 0.98, convention: str = "gauss") -> np.ndarray:
    """Log-spaced times spanning the requested decades up to just below the
    boundary-guard ceiling."""
    if decades <= 0.0 or count < 2:
        raise ValidationError("need positive decades and at least two times")
    t_hi = safety * max_admissible_time(diffusion, staircase, convention)
    t_lo = t_hi / 10.0 ** decades
    return np.geomspace(t_lo, t_hi, count)


def msd_exponent(series: MsdSeries) -> PowerLawFit:
    return fit_power_law(series.times, series.msd)
