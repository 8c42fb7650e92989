"""Parametrized self-similar fractal curves.

A generator is a polyline from (0,0) to (1,0); a curve of level m is the
m-fold replacement of every segment by a scaled/rotated copy of the
generator. Knots carry a uniform parameter grid on [a0, b0], so the k-th
vertex of a level-m curve sits at u = a0 + k*(b0-a0)/N^m. Refinement keeps
existing vertices verbatim, which makes knot lookups across levels exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, OffCurveError

VERTEX_CAP = 4 ** 12 + 1


def _as_points(vertices) -> np.ndarray:
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValidationError("generator vertices must be an (N+1, 2) array with N >= 1")
    return pts


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) \
        - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def _segments_touch(p0, p1, q0, q1, eps: float) -> bool:
    """Closed-segment intersection test with an absolute area tolerance."""
    d1 = _cross(q0, q1, p0)
    d2 = _cross(q0, q1, p1)
    d3 = _cross(p0, p1, q0)
    d4 = _cross(p0, p1, q1)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True

    def on_segment(a, b, p):
        if abs(_cross(a, b, p)) > eps:
            return False
        lo = np.minimum(a, b) - eps
        hi = np.maximum(a, b) + eps
        return bool(np.all(p >= lo) and np.all(p <= hi))

    return (on_segment(q0, q1, p0) or on_segment(q0, q1, p1)
            or on_segment(p0, p1, q0) or on_segment(p0, p1, q1))


def polyline_self_intersects(points: np.ndarray, eps_scale: float = 1e-12) -> bool:
    """True if any two non-adjacent segments touch, or an adjacent pair
    doubles back along itself. Adjacent forward-collinear continuation is
    allowed (a straight run is not a self-intersection)."""
    pts = np.asarray(points, dtype=float)
    n = len(pts) - 1
    scale = float(np.abs(pts).max() or 1.0)
    eps = eps_scale * scale * scale
    d = np.diff(pts, axis=0)
    for i in range(n - 1):
        # adjacent pair: reject collinear backtracking
        cross = d[i, 0] * d[i + 1, 1] - d[i, 1] * d[i + 1, 0]
        dot = d[i] @ d[i + 1]
        if abs(cross) <= eps and dot < 0:
            return True
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1 and np.allclose(pts[0], pts[-1]):
                continue  # closed polylines share the wrap endpoint
            if _segments_touch(pts[i], pts[i + 1], pts[j], pts[j + 1], eps):
                return True
    return False


def level_chords_intersect(points: np.ndarray) -> bool:
    """Vectorized check that no two non-adjacent chords of a refined curve
    touch. Used by tests on deep levels where the pairwise python loop in
    polyline_self_intersects would be too slow."""
    pts = np.asarray(points, dtype=float)
    n = len(pts) - 1
    a = pts[:-1]
    b = pts[1:]
    scale = float(np.abs(pts).max() or 1.0)
    eps = 1e-12 * scale * scale
    block = 128
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        ai = a[i0:i1, None, :]
        bi = b[i0:i1, None, :]
        # only pairs j >= i+2
        j0 = i0 + 2
        if j0 >= n:
            continue
        aj = a[None, j0:, :]
        bj = b[None, j0:, :]
        d1 = (bj[..., 0] - aj[..., 0]) * (ai[..., 1] - aj[..., 1]) \
            - (bj[..., 1] - aj[..., 1]) * (ai[..., 0] - aj[..., 0])
        d2 = (bj[..., 0] - aj[..., 0]) * (bi[..., 1] - aj[..., 1]) \
            - (bj[..., 1] - aj[..., 1]) * (bi[..., 0] - aj[..., 0])
        d3 = (bi[..., 0] - ai[..., 0]) * (aj[..., 1] - ai[..., 1]) \
            - (bi[..., 1] - ai[..., 1]) * (aj[..., 0] - ai[..., 0])
        d4 = (bi[..., 0] - ai[..., 0]) * (bj[..., 1] - ai[..., 1]) \
            - (bi[..., 1] - ai[..., 1]) * (bj[..., 0] - ai[..., 0])
        # mask out pairs with j < i+2 inside the block
        ivals = np.arange(i0, i1)[:, None]
        jvals = np.arange(j0, n)[None, :]
        valid = jvals >= ivals + 2
        proper = (((d1 > eps) & (d2 < -eps)) | ((d1 < -eps) & (d2 > eps))) \
            & (((d3 > eps) & (d4 < -eps)) | ((d3 < -eps) & (d4 > eps)))
        # endpoint-on-segment contacts: collinear orientation plus bbox hit
        leps = 1e-12 * scale
        lo_i = np.minimum(ai, bi) - leps
        hi_i = np.maximum(ai, bi) + leps
        lo_j = np.minimum(aj, bj) - leps
        hi_j = np.maximum(aj, bj) + leps

        def _in_box(p, lo, hi):
            return np.all((p >= lo) & (p <= hi), axis=-1)

        touch = ((np.abs(d1) <= eps) & _in_box(ai, lo_j, hi_j)) \
            | ((np.abs(d2) <= eps) & _in_box(bi, lo_j, hi_j)) \
            | ((np.abs(d3) <= eps) & _in_box(aj, lo_i, hi_i)) \
            | ((np.abs(d4) <= eps) & _in_box(bj, lo_i, hi_i))
        if bool(((proper | touch) & valid).any()):
            return True
    return False


@dataclass(frozen=True)
class GeneratorSpec:
    """Polyline generator of an exactly self-similar curve.

    vertices : (N+1, 2) array, first (0,0), last (1,0)
    ratios   : (N,) contraction ratios; must equal the segment lengths
    name     : label used by presets and provenance output
    """

    vertices: np.ndarray
    ratios: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        pts = _as_points(self.vertices)
        ratios = np.asarray(self.ratios, dtype=float)
        n = len(pts) - 1
        if ratios.shape != (n,):
            raise ValidationError(f"expected {n} ratios, got {ratios.shape}")
        if not (np.allclose(pts[0], [0.0, 0.0], atol=1e-15)
                and np.allclose(pts[-1], [1.0, 0.0], atol=1e-15)):
            raise ValidationError("generator must run from (0,0) to (1,0)")
        seg_len = np.hypot(*np.diff(pts, axis=0).T)
        if np.any(seg_len == 0.0):
            raise ValidationError("generator has a zero-length segment")
        if not np.allclose(seg_len, ratios, rtol=1e-12, atol=1e-15):
            raise ValidationError("ratios must equal the generator segment lengths")
        if np.any(ratios <= 0.0):
            raise ValidationError("ratios must be positive")
        if n == 1:
            if not np.isclose(ratios[0], 1.0):
                raise ValidationError("a single-segment generator must be the identity (r=1)")
        else:
            if np.any(ratios >= 1.0):
                raise ValidationError("ratios must lie in (0,1) for N > 1")
            if not np.allclose(ratios, ratios[0], rtol=1e-12):
                raise ValidationError("only uniform contraction ratios are supported")
            if n * ratios[0] < 1.0:
                raise ValidationError("need N*r >= 1 so the generator can span its chord")
        if polyline_self_intersects(pts):
            raise ValidationError("generator polyline is self-intersecting")
        pts = pts.copy()
        ratios = ratios.copy()
        pts.setflags(write=False)
        ratios.setflags(write=False)
        object.__setattr__(self, "vertices", pts)
        object.__setattr__(self, "ratios", ratios)

    @classmethod
    def from_vertices(cls, vertices, name: str = "custom") -> "GeneratorSpec":
        pts = _as_points(vertices)
        seg_len = np.hypot(*np.diff(pts, axis=0).T)
        return cls(vertices=pts, ratios=seg_len, name=name)

    @property
    def segment_count(self) -> int:
        return len(self.ratios)

    def similarity_dimension(self) -> float:
        """log N / log(1/r) for the uniform-ratio family; 1.0 for N=1."""
        n = self.segment_count
        r = float(self.ratios[0])
        if n == 1:
            return 1.0
        return float(np.log(n) / np.log(1.0 / r))


def koch_generator() -> GeneratorSpec:
    """Triadic Koch generator: four segments of ratio 1/3, apex (1/2, sqrt(3)/6)."""
    s3 = np.sqrt(3.0) / 6.0
    verts = np.array([[0.0, 0.0], [1 / 3, 0.0], [0.5, s3], [2 / 3, 0.0], [1.0, 0.0]])
    return GeneratorSpec.from_vertices(verts, name="koch")


def quadratic_koch_generator() -> GeneratorSpec:
    """Eight segments of ratio 1/4 (square bump up then down); dimension 1.5."""
    verts = np.array([
        [0.0, 0.0], [0.25, 0.0], [0.25, 0.25], [0.5, 0.25], [0.5, 0.0],
        [0.5, -0.25], [0.75, -0.25], [0.75, 0.0], [1.0, 0.0],
    ])
    return GeneratorSpec.from_vertices(verts, name="quadratic-koch")


def segment_generator() -> GeneratorSpec:
    """Straight line split in two; refines to a genuine grid with dimension 1."""
    verts = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
    return GeneratorSpec.from_vertices(verts, name="segment")


def identity_generator() -> GeneratorSpec:
    """Single unit segment; refinement is idempotent (2 knots at every level)."""
    verts = np.array([[0.0, 0.0], [1.0, 0.0]])
    return GeneratorSpec.from_vertices(verts, name="identity")


PRESET_GENERATORS = {
    "koch": koch_generator,
    "segment": segment_generator,
    "quadratic-koch": quadratic_koch_generator,
    "identity": identity_generator,
}


@dataclass(frozen=True)
class FractalCurve:
    """A level-m refinement with its uniform parameter grid.

    params[k] = a0 + k*(b0-a0)/N^m and points[k] = w(params[k]).
    diameter is the bounding-box diagonal, used to scale geometric
    tolerances.
    """

    generator: GeneratorSpec
    level: int
    a0: float
    b0: float
    params: np.ndarray
    points: np.ndarray
    diameter: float
    embedding_dim: int = 2

    @property
    def knot_count(self) -> int:
        return len(self.params)

    @property
    def spacing(self) -> float:
        """Parameter distance between adjacent knots."""
        return (self.b0 - self.a0) / (self.knot_count - 1)

    def start(self) -> np.ndarray:
        return self.points[0]

    def end(self) -> np.ndarray:
        return self.points[-1]


def _refine_once(points: np.ndarray, gen: np.ndarray) -> np.ndarray:
    """Replace every segment by the generator image that maps (0,0)->p, (1,0)->q.

    Old vertices are carried through verbatim so refinement is exact on them.
    """
    p = points[:-1]
    delta = points[1:] - p  # (M, 2); rotation+scale columns
    inner = gen[1:-1]  # new interior vertices per segment
    # T(v) = p + [[dx,-dy],[dy,dx]] @ v
    x = p[:, None, 0] + delta[:, None, 0] * inner[None, :, 0] - delta[:, None, 1] * inner[None, :, 1]
    y = p[:, None, 1] + delta[:, None, 1] * inner[None, :, 0] + delta[:, None, 0] * inner[None, :, 1]
    m, g = x.shape
    out = np.empty(((g + 1) * m + 1, 2))
    block = out[:-1].reshape(m, g + 1, 2)
    block[:, 0, :] = p
    block[:, 1:, 0] = x
    block[:, 1:, 1] = y
    out[-1] = points[-1]
    return out


def build_curve(spec: GeneratorSpec, level: int, a0: float = 0.0, b0: float = 1.0,
                vertex_cap: int = VERTEX_CAP) -> FractalCurve:
    """Refine the generator `level` times over the parameter interval [a0, b0]."""
    if level < 0 or int(level) != level:
        raise ValidationError("level must be a non-negative integer")
    if not b0 > a0:
        raise ValidationError("need b0 > a0")
    n = spec.segment_count
    count = n ** level + 1
    if count > vertex_cap:
        raise ValidationError(
            f"level {level} needs {count} vertices, above the cap {vertex_cap}")
    points = np.array([[0.0, 0.0], [1.0, 0.0]])
    if n > 1:
        for _ in range(level):
            points = _refine_once(points, spec.vertices)
    params = a0 + np.arange(len(points)) * ((b0 - a0) / (len(points) - 1))
    params[-1] = b0
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    diameter = float(np.hypot(*(hi - lo)))
    points.setflags(write=False)
    params.setflags(write=False)
    return FractalCurve(generator=spec, level=int(level), a0=float(a0), b0=float(b0),
                        params=params, points=points, diameter=diameter)


def locate(curve: FractalCurve, u: float) -> np.ndarray:
    """Point w(u); exact on knots, piecewise linear between them."""
    if not (curve.a0 <= u <= curve.b0):
        raise ValidationError(f"u={u!r} outside [{curve.a0}, {curve.b0}]")
    h = curve.spacing
    k = int(np.floor((u - curve.a0) / h))
    k = min(max(k, 0), curve.knot_count - 2)
    # exact knot hits return the stored vertex bitwise
    if u == curve.params[k]:
        return curve.points[k].copy()
    if u == curve.params[k + 1]:
        return curve.points[k + 1].copy()
    frac = (u - curve.params[k]) / (curve.params[k + 1] - curve.params[k])
    return curve.points[k] + frac * (curve.points[k + 1] - curve.points[k])


def invert(curve: FractalCurve, point, tol: float | None = None) -> float:
    """Parameter u with w(u) = point, by nearest-chord projection.

    Raises OffCurveError (with the nearest distance) when the point is
    farther than tol from every chord. tol defaults to 1e-12 * diameter.
    """
    if tol is None:
        tol = 1e-12 * curve.diameter
    p = np.asarray(point, dtype=float)
    if p.shape != (2,):
        raise ValidationError("point must be a length-2 coordinate pair")
    a = curve.points[:-1]
    d = curve.points[1:] - a
    seg2 = np.einsum("ij,ij->i", d, d)
    t = np.einsum("ij,ij->i", p[None, :] - a, d) / seg2
    t = np.clip(t, 0.0, 1.0)
    foot = a + t[:, None] * d
    dist2 = np.einsum("ij,ij->i", foot - p[None, :], foot - p[None, :])
    k = int(np.argmin(dist2))
    dist = float(np.sqrt(dist2[k]))
    if dist > tol:
        raise OffCurveError(
            f"point {p.tolist()} is off the curve (nearest chord distance {dist:.3e})",
            nearest_distance=dist)
    frac = float(t[k])
    if frac <= 0.0:
        return float(curve.params[k])
    if frac >= 1.0:
        return float(curve.params[k + 1])
    return float(curve.params[k] + frac * (curve.params[k + 1] - curve.params[k]))


def chord_lengths(curve: FractalCurve, m: int | None = None) -> np.ndarray:
    """Euclidean lengths of the level-m chords (m defaults to the build level).

    Level-m vertices are a stride-subsample of the build-level vertex table,
    so these are distances between true curve points.
    """
    if m is None:
        m = curve.level
    if m < 0 or m > curve.level:
        raise ValidationError(f"level {m} outside [0, {curve.level}]")
    stride = curve.generator.segment_count ** (curve.level - m)
    pts = curve.points[::stride]
    return np.hypot(*np.diff(pts, axis=0).T)
