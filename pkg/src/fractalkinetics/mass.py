"""Mass function, dimension estimate, and the integral staircase.

The mass of a curve piece at refinement level m is the vertex-aligned sum
sum_k |w(u_{k+1}) - w(u_k)|^alpha / Gamma(alpha+1) over the level-m knots
covering the piece. For an exactly self-similar curve these sums are
level-independent exactly when alpha hits the similarity dimension: below
it they grow geometrically with level, above it they decay, which is what
the bisection estimator classifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import FractalCurve, chord_lengths, invert, locate
from .errors import (AmbiguousScalingError, ValidationError)

FLAT_TOL = 1e-3  # |mean log level-ratio| below this counts as flat


@dataclass
class MassEstimate:
    """Level-by-level subdivision sums for one interval and exponent."""

    alpha: float
    a: float
    b: float
    level_values: list = field(default_factory=list)  # [(level, sum), ...]
    extrapolated: float = 0.0
    gamma_norm: float = 1.0
    classification: str = "flat"
    snapped_interval: tuple = (0.0, 1.0)
    max_snap_distance: float = 0.0

    @property
    def value(self) -> float:
        """Finest-level sum, the working approximation of the mass."""
        return self.level_values[-1][1]


def _classify(log_slope: float, flat_tol: float) -> str:
    if log_slope > flat_tol:
        return "growing"
    if log_slope < -flat_tol:
        return "decaying"
    return "flat"


def _level_log_slope(values: np.ndarray) -> float:
    """Least-squares slope of log(sum) against level."""
    if np.any(values <= 0.0):
        return -np.inf
    logs = np.log(values)
    m = np.arange(len(logs), dtype=float)
    if len(logs) < 2:
        return 0.0
    slope = np.polyfit(m, logs, 1)[0]
    return float(slope)


def mass(curve: FractalCurve, alpha: float, a: float | None = None,
         b: float | None = None, max_level: int | None = None,
         flat_tol: float = FLAT_TOL) -> MassEstimate:
    """Vertex-aligned mass sums of C(a, b) at every level up to max_level.

    Endpoints are snapped outward to the nearest knots of each level; the
    largest snap distance over all levels is reported. The extrapolated
    value is the last-level sum when the level sequence is flat, otherwise
    the log-linear limit (0 for decay, inf for growth).
    """
    if alpha < 1.0:
        raise ValidationError("alpha must be >= 1")
    a = curve.a0 if a is None else float(a)
    b = curve.b0 if b is None else float(b)
    if not (curve.a0 <= a < b <= curve.b0):
        raise ValidationError(f"need a0 <= a < b <= b0, got [{a}, {b}]")
    if max_level is None:
        max_level = curve.level
    if max_level > curve.level or max_level < 0:
        raise ValidationError(f"max_level {max_level} outside [0, {curve.level}]")
    gamma_norm = math.gamma(alpha + 1.0)
    n = curve.generator.segment_count
    span = curve.b0 - curve.a0
    levels = []
    max_snap = 0.0
    snapped = (a, b)
    for m in range(max_level + 1):
        stride = n ** (curve.level - m)
        pts = curve.points[::stride]
        prm = curve.params[::stride]
        h = span / (n ** m)
        ia = int(np.floor((a - curve.a0) / h))
        ib = int(np.ceil((b - curve.a0) / h))
        ia = min(max(ia, 0), len(prm) - 2)
        ib = min(max(ib, ia + 1), len(prm) - 1)
        snap = max(abs(prm[ia] - a), abs(prm[ib] - b))
        max_snap = max(max_snap, snap)
        if m == max_level:
            snapped = (float(prm[ia]), float(prm[ib]))
        seg = pts[ia:ib + 1]
        lengths = np.hypot(*np.diff(seg, axis=0).T)
        levels.append((m, float(np.sum(lengths ** alpha) / gamma_norm)))
    values = np.array([v for _, v in levels])
    slope = _level_log_slope(values)
    cls = _classify(slope, flat_tol)
    if cls == "flat":
        extrapolated = float(values[-1])
    elif cls == "decaying":
        extrapolated = 0.0
    else:
        extrapolated = math.inf
    return MassEstimate(alpha=float(alpha), a=a, b=b, level_values=levels,
                        extrapolated=extrapolated, gamma_norm=gamma_norm,
                        classification=cls, snapped_interval=snapped,
                        max_snap_distance=float(max_snap))


@dataclass
class DimensionEstimate:
    """Bisection result: alpha_hat with its bracket and per-trial diagnostics."""

    alpha_hat: float
    bracket: tuple
    growth_diagnostics: list = field(default_factory=list)  # [(alpha, log_slope, label)]


def estimate_dimension(curve: FractalCurve, alpha_low: float = 1.0,
                       alpha_high: float = 2.0, tol: float = 1e-3,
                       flat_tol: float = FLAT_TOL,
                       max_level: int | None = None) -> DimensionEstimate:
    """Bisect on the exponent separating growing from decaying level sums.

    Requires growth at alpha_low and decay at alpha_high unless an endpoint
    itself classifies flat, in which case that endpoint is the answer. Flat
    at both ends means the levels cannot resolve the transition.
    """
    if alpha_low < 1.0:
        raise ValidationError("alpha_low must be >= 1")
    if not alpha_high > alpha_low:
        raise ValidationError("need alpha_high > alpha_low")
    if max_level is None:
        max_level = curve.level
    n = curve.generator.segment_count
    lengths_by_level = [chord_lengths(curve, m) for m in range(max_level + 1)]

    diagnostics = []

    def probe(alpha: float) -> str:
        sums = np.array([float(np.sum(L ** alpha)) for L in lengths_by_level])
        slope = _level_log_slope(sums)
        label = _classify(slope, flat_tol)
        diagnostics.append((float(alpha), slope, label))
        return label

    lo_label = probe(alpha_low)
    hi_label = probe(alpha_high)
    if lo_label == "flat" and hi_label == "flat":
        raise AmbiguousScalingError(
            "level sums are flat at both bracket ends; refine to deeper levels")
    if lo_label == "flat":
        return DimensionEstimate(alpha_hat=float(alpha_low),
                                 bracket=(float(alpha_low), float(alpha_high)),
                                 growth_diagnostics=diagnostics)
    if hi_label == "flat":
        return DimensionEstimate(alpha_hat=float(alpha_high),
                                 bracket=(float(alpha_low), float(alpha_high)),
                                 growth_diagnostics=diagnostics)
    if lo_label != "growing" or hi_label != "decaying":
        raise ValidationError(
            f"bracket does not straddle the transition: alpha_low is {lo_label}, "
            f"alpha_high is {hi_label}")
    lo, hi = float(alpha_low), float(alpha_high)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        label = probe(mid)
        if label == "flat":
            return DimensionEstimate(alpha_hat=mid, bracket=(lo, hi),
                                     growth_diagnostics=diagnostics)
        if label == "growing":
            lo = mid
        else:
            hi = mid
    return DimensionEstimate(alpha_hat=0.5 * (lo + hi), bracket=(lo, hi),
                             growth_diagnostics=diagnostics)


@dataclass(frozen=True)
class StaircaseTable:
    """Cumulative mass along the curve, tabulated at the build-level knots.

    values[k] is the mass of C(a0, u_k); values[0] = 0 at the anchor p0 = a0.
    Strictly increasing, so it is invertible by binary search.
    """

    alpha: float
    p0: float
    knots: np.ndarray    # parameter values u_k
    values: np.ndarray   # S(u_k)
    gamma_norm: float

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def span(self) -> tuple:
        """Conjugate-domain endpoints (S at a0 and at b0)."""
        return float(self.values[0]), float(self.values[-1])

    def value_at(self, u: float) -> float:
        """S(u), linear between knots."""
        if not (self.knots[0] <= u <= self.knots[-1]):
            raise ValidationError(f"u={u!r} outside the staircase domain")
        return float(np.interp(u, self.knots, self.values))

    def parameter_at(self, y: float) -> float:
        """Inverse staircase lookup: the u with S(u) = y."""
        if not (self.values[0] <= y <= self.values[-1]):
            raise ValidationError(f"y={y!r} outside the conjugate domain")
        return float(np.interp(y, self.values, self.knots))


def build_staircase(curve: FractalCurve, alpha: float | None = None,
                    dim_tol: float = 1e-2) -> StaircaseTable:
    """Cumulative mass table at the curve's build level.

    alpha defaults to the generator's similarity dimension and must stay
    within dim_tol of it, otherwise the staircase degenerates under
    refinement (flat or blowing up) and conjugation is meaningless.
    """
    dim = curve.generator.similarity_dimension()
    if alpha is None:
        alpha = dim
    if abs(alpha - dim) > dim_tol:
        raise ValidationError(
            f"alpha={alpha} is {abs(alpha - dim):.3g} away from the similarity "
            f"dimension {dim:.6g}; the staircase needs alpha at the dimension "
            f"(tolerance {dim_tol})")
    lengths = chord_lengths(curve)
    if np.any(lengths == 0.0):
        raise ValidationError("curve has a zero-length chord")
    gamma_norm = math.gamma(alpha + 1.0)
    steps = lengths ** alpha / gamma_norm
    values = np.concatenate([[0.0], np.cumsum(steps)])
    values.setflags(write=False)
    return StaircaseTable(alpha=float(alpha), p0=curve.a0,
                          knots=curve.params, values=values,
                          gamma_norm=gamma_norm)


def conjugate_coordinate(staircase: StaircaseTable, curve: FractalCurve,
                         theta) -> float:
    """y = S(u) for the curve point theta (geometric inversion, then lookup)."""
    u = invert(curve, theta)
    return staircase.value_at(u)


def point_at_conjugate(staircase: StaircaseTable, curve: FractalCurve,
                       y: float) -> np.ndarray:
    """Curve point whose conjugate coordinate is y."""
    u = staircase.parameter_at(y)
    return locate(curve, u)


def random_refinement_sum(curve: FractalCurve, alpha: float, mesh_level: int,
                          rng: np.random.Generator) -> float:
    """Alpha-sum over one random complete mixed-level refinement.

    Starting from the whole interval, each piece at a level below mesh_level
    must refine; pieces at or beyond it refine with probability 1/2 until
    the build level. Every piece is either kept whole or split into all N
    children, so chords always connect knots of a common complete level,
    the family self-similarity is probed without admitting the knot-skipping
    subdivisions that undershoot the uniform sums.
    """
    if mesh_level < 0 or mesh_level > curve.level:
        raise ValidationError("mesh_level outside the curve's level range")
    n = curve.generator.segment_count
    gamma_norm = math.gamma(alpha + 1.0)
    total = 0.0
    # stack of (level, first_knot_index_at_build_level)
    stack = [(0, 0)]
    step_full = n ** curve.level
    while stack:
        lvl, k0 = stack.pop()
        width = step_full // (n ** lvl)
        deep_enough = lvl >= mesh_level
        at_bottom = lvl == curve.level
        if at_bottom or (deep_enough and rng.random() < 0.5):
            p = curve.points[k0]
            q = curve.points[k0 + width]
            total += float(np.hypot(*(q - p))) ** alpha
        else:
            child = width // n
            for j in range(n):
                stack.append((lvl + 1, k0 + j * child))
    return total / gamma_norm
