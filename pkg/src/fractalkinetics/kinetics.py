"""Density evolution in the conjugate coordinate.

A transition kernel p(y | y', tau) advances a density one step of duration
tau through the composition integral V(y, t+tau) = int p(y|y') V(y', t) dy'.
Its moments in the displacement give the drift/diffusion coefficients of
the equivalent differential (Fokker-Planck) form, which an explicit
conservative stepper integrates directly.

Two closed-form conventions coexist and every caller declares one:

  "pde"    V(y,t) = (4 pi A t)^(-1/2) exp(-y^2 / (4 A t)), variance 2 A t.
           This is the heat kernel of V_t = A V_yy and is what the
           Gaussian step kernel and the A2-coefficient stepper converge to.
  "gauss"  V(y,t) = (2 pi A t)^(-1/2) exp(-y^2 / (2 A t)), variance A t,
           i.e. the pde solution at time t/2. Used for the density-shape
           and displacement observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.special import gammaincc

from .calculus import GridFunction
from .curves import FractalCurve
from .errors import (BoundaryEscapeError, BoundaryProximityError,
                     ResolutionError, StabilityError, ValidationError)
from .mass import StaircaseTable

CONVENTIONS = ("pde", "gauss")


def _variance(t: float, diffusion: float, convention: str) -> float:
    if convention == "pde":
        return 2.0 * diffusion * t
    if convention == "gauss":
        return diffusion * t
    raise ValidationError(f"unknown convention {convention!r}; use one of {CONVENTIONS}")


def diffusion_density(y, t: float, diffusion: float = 0.25,
                      convention: str = "gauss"):
    """Closed-form point-source density at time t (see module docstring)."""
    if t <= 0.0:
        raise ValidationError("t must be positive")
    if diffusion <= 0.0:
        raise ValidationError("diffusion must be positive")
    var = _variance(t, diffusion, convention)
    y = np.asarray(y, dtype=float)
    return np.exp(-y * y / (2.0 * var)) / np.sqrt(2.0 * math.pi * var)


def diffusion_solution(t: float, diffusion: float, theta, curve: FractalCurve,
                       staircase: StaircaseTable,
                       convention: str = "gauss") -> float:
    """Closed-form density at a curve point (evaluated at y = S(u))."""
    from .mass import conjugate_coordinate
    y = conjugate_coordinate(staircase, curve, theta)
    return float(diffusion_density(y, t, diffusion, convention))


@dataclass(frozen=True)
class TransitionKernel:
    """One-step transition density p(y | y', tau).

    kind "gaussian" uses variance 2*diffusion*tau and mean y' + drift*tau;
    at diffusion = 1/4, drift = 0 that is (pi tau)^(-1/2) exp(-(y-y')^2/tau).
    kind "custom" delegates to rule(y, y_prime) (vectorized, broadcastable).
    """

    tau: float
    kind: str = "gaussian"
    diffusion: float = 0.25
    drift: float = 0.0
    rule: object | None = None

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValidationError("tau must be positive")
        if self.kind == "gaussian":
            if self.diffusion <= 0.0:
                raise ValidationError("gaussian kernel needs positive diffusion")
        elif self.kind == "custom":
            if self.rule is None:
                raise ValidationError("custom kernel needs a rule(y, y_prime)")
        else:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")

    def density(self, y, y_prime):
        y = np.asarray(y, dtype=float)
        yp = np.asarray(y_prime, dtype=float)
        if self.kind == "gaussian":
            var = 2.0 * self.diffusion * self.tau
            d = y - yp - self.drift * self.tau
            return np.exp(-d * d / (2.0 * var)) / np.sqrt(2.0 * math.pi * var)
        return np.asarray(self.rule(y, yp), dtype=float)

    def width(self) -> float:
        """Standard deviation of one step's displacement."""
        if self.kind == "gaussian":
            return math.sqrt(2.0 * self.diffusion * self.tau)
        # quadrature estimate for custom kernels, centered at zero
        r = 12.0 * math.sqrt(self.tau)
        d = np.linspace(0.0, r, 4001)
        delta = np.concatenate([-d[::-1], d[1:]])
        p = self.density(delta, 0.0)
        m0 = simpson(p, x=delta)
        m1 = simpson(delta * p, x=delta) / m0
        m2 = simpson(delta * delta * p, x=delta) / m0
        return float(math.sqrt(max(m2 - m1 * m1, 0.0)))


def gaussian_kernel(tau: float, diffusion: float = 0.25,
                    drift: float = 0.0) -> TransitionKernel:
    return TransitionKernel(tau=tau, kind="gaussian", diffusion=diffusion,
                            drift=drift)


def custom_kernel(tau: float, rule) -> TransitionKernel:
    return TransitionKernel(tau=tau, kind="custom", rule=rule)


@dataclass
class DensitySnapshot:
    """A density on a conjugate grid at one time.

    origin records how it was produced: analytic (closed form), propagated
    (kernel composition), or stepped (differential stepper).
    """

    t: float
    grid: np.ndarray
    values: np.ndarray
    origin: str = "analytic"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1 or len(g) < 2:
            raise ValidationError("grid and values must be matching 1-d arrays")
        if np.any(np.diff(g) <= 0.0):
            raise ValidationError("grid must be strictly increasing")
        vmax = float(np.max(np.abs(v))) or 1.0
        if float(v.min()) < -1e-10 * vmax:
            raise ValidationError("density has significantly negative values")
        self.grid = g
        self.values = v

    @property
    def normalization(self) -> float:
        return float(np.trapezoid(self.values, self.grid))

    def mean(self) -> float:
        return float(np.trapezoid(self.grid * self.values, self.grid)
                     / self.normalization)

    def variance(self) -> float:
        m = self.mean()
        return float(np.trapezoid((self.grid - m) ** 2 * self.values, self.grid)
                     / self.normalization)


def uniform_grid(lo: float, hi: float, count: int) -> np.ndarray:
    if count < 2 or hi <= lo:
        raise ValidationError("need hi > lo and at least two grid points")
    return np.linspace(lo, hi, count)


def analytic_snapshot(grid: np.ndarray, t: float, diffusion: float = 0.25,
                      convention: str = "pde", center: float = 0.0,
                      origin: str = "analytic") -> DensitySnapshot:
    vals = diffusion_density(np.asarray(grid) - center, t, diffusion, convention)
    return DensitySnapshot(t=t, grid=np.asarray(grid, dtype=float),
                           values=np.asarray(vals), origin=origin)


def l1_distance(a: DensitySnapshot, b: DensitySnapshot) -> float:
    if not np.array_equal(a.grid, b.grid):
        raise ValidationError("snapshots live on different grids")
    return float(np.trapezoid(np.abs(a.values - b.values), a.grid))


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.empty_like(grid)
    d = np.diff(grid)
    w[0] = d[0] / 2.0
    w[-1] = d[-1] / 2.0
    w[1:-1] = (d[:-1] + d[1:]) / 2.0
    return w


def chapman_kolmogorov_step(v: DensitySnapshot, kernel: TransitionKernel,
                            curve: FractalCurve | None = None,
                            staircase: StaircaseTable | None = None,
                            escape_tol: float = 1e-6) -> DensitySnapshot:
    """One composition step: V(y, t+tau) = int p(y|y') V(y', t) dy'.

    The kernel must be resolved by the grid (width >= 3 spacings) and must
    not push more than escape_tol of the mass off the truncated domain;
    what little escapes is renormalized back. curve and staircase are
    accepted for provenance symmetry with the curve-side workflow; the
    integral itself lives entirely on the conjugate grid.
    """
    del curve, staircase  # conjugate-space operation; accepted for symmetry
    spacing = float(np.max(np.diff(v.grid)))
    width = kernel.width()
    if width < 3.0 * spacing:
        raise ResolutionError(
            f"kernel width {width:.3e} under 3 grid spacings ({3 * spacing:.3e}); "
            "refine the grid or enlarge tau")
    w = _trapezoid_weights(v.grid)
    dens = kernel.density(v.grid[:, None], v.grid[None, :])
    new_vals = dens @ (w * v.values)
    mass_in = v.normalization
    mass_out = float(np.trapezoid(new_vals, v.grid))
    escape = mass_in - mass_out
    if escape > escape_tol:
        raise BoundaryEscapeError(
            f"{escape:.3e} of the mass escaped the domain in one step "
            f"(tolerance {escape_tol:.1e}); the truncated-domain composition "
            "is invalid this close to the boundary")
    if mass_out > 0.0:
        new_vals *= mass_in / mass_out
    return DensitySnapshot(t=v.t + kernel.tau, grid=v.grid,
                           values=np.maximum(new_vals, 0.0), origin="propagated")


def propagate_chapman_kolmogorov(v0: DensitySnapshot, times,
                                 kernel_factory=None, diffusion: float = 0.25,
                                 escape_tol: float = 1e-6) -> list:
    """Snapshots at the requested times by stepping between them.

    kernel_factory(tau) builds the per-interval kernel; the default is the
    Gaussian family with the given diffusion.
    """
    if kernel_factory is None:
        kernel_factory = lambda tau: gaussian_kernel(tau, diffusion=diffusion)
    times = sorted(float(t) for t in times)
    out = []
    current = v0
    for t in times:
        if t < current.t - 1e-12:
            raise ValidationError(f"target time {t} precedes the current state")
        if t > current.t:
            current = chapman_kolmogorov_step(
                current, kernel_factory(t - current.t), escape_tol=escape_tol)
            current = DensitySnapshot(t=t, grid=current.grid,
                                      values=current.values, origin="propagated")
        out.append(current)
    return out


@dataclass
class MomentSet:
    """Displacement moments of one kernel at one center."""

    tau: float
    center: float
    moments: dict = field(default_factory=dict)       # n -> int Delta^n p dDelta
    coefficients: dict = field(default_factory=dict)  # n -> moments[n] / (n! tau)
    m0: float = 1.0
    tail_bounds: dict = field(default_factory=dict)   # n -> analytic tail bound
    boundary_margin: float = math.inf                 # distance to ends, in sqrt(tau)


def _domain_endpoints(domain) -> tuple:
    if isinstance(domain, StaircaseTable):
        return domain.span()
    lo, hi = float(domain[0]), float(domain[1])
    if not hi > lo:
        raise ValidationError("conjugate domain must have hi > lo")
    return lo, hi


def _gaussian_tail_bound(n: int, sigma: float, r: float) -> float:
    """2 int_r^inf x^n N(0, sigma^2)(x) dx, exact via the incomplete gamma."""
    s = (n + 1) / 2.0
    x = r * r / (2.0 * sigma * sigma)
    coef = (2.0 ** (n / 2.0)) * sigma ** n / math.sqrt(math.pi)
    return float(coef * math.gamma(s) * gammaincc(s, x))


def transitional_moments(kernel: TransitionKernel, y_prime: float, n_max: int,
                         domain, num_points: int = 2001) -> MomentSet:
    """Moments int Delta^n p(y'+Delta | y') dDelta, n = 1..n_max.

    domain is a StaircaseTable (its conjugate span) or an explicit (lo, hi)
    pair. y' must sit at least 6 sqrt(tau) from both ends, the condition for
    replacing the integration limits by +-infinity. Composite Simpson on a
    symmetric window |Delta| <= 8 sqrt(tau/2); the Gaussian tail beyond the
    window is bounded analytically and reported.
    """
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    lo, hi = _domain_endpoints(domain)
    if not (lo <= y_prime <= hi):
        raise ValidationError(f"y'={y_prime} outside the conjugate domain [{lo}, {hi}]")
    tau = kernel.tau
    margin = min(y_prime - lo, hi - y_prime)
    need = 6.0 * math.sqrt(tau)
    if margin < need:
        raise BoundaryProximityError(
            f"y'={y_prime} is {margin:.3e} from a domain end; needs >= {need:.3e} "
            "(6 sqrt(tau)) for the infinite-limit replacement")
    r = 8.0 * math.sqrt(tau / 2.0)
    half = (num_points + 1) // 2
    d = np.linspace(0.0, r, half)
    delta = np.concatenate([-d[::-1], d[1:]])  # exactly symmetric nodes
    p = kernel.density(y_prime + delta, y_prime)
    ms = MomentSet(tau=tau, center=float(y_prime),
                   boundary_margin=float(margin / math.sqrt(tau)))
    ms.m0 = float(simpson(p, x=delta))
    for n in range(1, n_max + 1):
        val = float(simpson(delta ** n * p, x=delta))
        ms.moments[n] = val
        ms.coefficients[n] = val / (math.factorial(n) * tau)
        if kernel.kind == "gaussian":
            sigma = math.sqrt(2.0 * kernel.diffusion * tau)
            ms.tail_bounds[n] = _gaussian_tail_bound(n, sigma, r)
    for n in range(2, n_max + 1, 2):
        if kernel.kind == "gaussian" and kernel.drift == 0.0 and ms.moments[n] < 0.0:
            raise ValidationError(f"even moment {n} is negative for a symmetric kernel")
    return ms


def kramers_moyal_coefficients(kernel: TransitionKernel, y_prime: float,
                               n_max: int, domain,
                               num_points: int = 2001) -> MomentSet:
    """Coefficients moments[n]/(n! tau); the linear-in-tau reading of the
    moment expansion. Same guards as transitional_moments."""
    return transitional_moments(kernel, y_prime, n_max, domain, num_points)


def richardson_coefficients(at_tau: MomentSet, at_2tau: MomentSet) -> dict:
    """Extract the linear-in-tau part: 2*c(tau) - c(2tau) kills the O(tau)
    residue of each raw coefficient."""
    if abs(at_2tau.tau - 2.0 * at_tau.tau) > 1e-12 * at_tau.tau:
        raise ValidationError("need moment sets at tau and exactly 2 tau")
    out = {}
    for n, c in at_tau.coefficients.items():
        if n in at_2tau.coefficients:
            out[n] = 2.0 * c - at_2tau.coefficients[n]
    return out


def transitional_moments_on_curve(kernel: TransitionKernel, theta_prime,
                                  n_max: int, curve: FractalCurve,
                                  staircase: StaircaseTable) -> dict:
    """Curve-side moments via the conjugate kernel and the curve integral.

    Evaluates the integrand at chord midpoints through genuine geometric
    inversion, so it exercises the curve-side route rather than reusing the
    grid shortcut. Equal to the conjugate moments up to quadrature error.
    """
    from .calculus import CurveFunction, fractal_integral
    from .mass import conjugate_coordinate

    y_prime = conjugate_coordinate(staircase, curve, theta_prime)
    # guard identical to the conjugate route
    transitional_moments(kernel, y_prime, 1, staircase)

    from .curves import invert as _invert

    def displacement(pts: np.ndarray) -> np.ndarray:
        ys = np.array([staircase.value_at(_invert(curve, p)) for p in pts])
        return ys - y_prime

    out = {}
    for n in range(1, n_max + 1):
        def rule(pts, n=n):
            d = displacement(pts)
            return d ** n * kernel.density(y_prime + d, y_prime)
        f = CurveFunction(curve=curve, rule=rule)
        out[n] = fractal_integral(f, curve.a0, curve.b0, curve, staircase)
    return out


def fokker_planck_step(v: DensitySnapshot, drift: GridFunction,
                       diffusion: GridFunction, dt: float) -> DensitySnapshot:
    """One explicit step of V_t = -(drift V)_y + (diffusion V)_yy.

    Conservative flux form on a uniform grid with zero-flux (reflecting)
    boundaries; interior stencils reduce to the standard central
    differences. Stability requires dt <= 0.5 dy^2 / max(diffusion).
    """
    y = v.grid
    d = np.diff(y)
    dy = float(d[0])
    if not np.allclose(d, dy, rtol=1e-9):
        raise ValidationError("differential stepping needs a uniform grid")
    for gf, label in ((drift, "drift"), (diffusion, "diffusion")):
        if not np.array_equal(gf.grid, y):
            raise ValidationError(f"{label} field lives on a different grid")
    a2 = diffusion.values
    if float(a2.min()) <= 0.0:
        raise ValidationError("diffusion coefficient must be strictly positive")
    if dt <= 0.0:
        raise ValidationError("dt must be positive")
    limit = 0.5 * dy * dy / float(a2.max())
    if dt > limit:
        raise StabilityError(
            f"dt={dt:.3e} exceeds the explicit stability limit {limit:.3e}")
    a1v = drift.values * v.values
    a2v = a2 * v.values
    flux = 0.5 * (a1v[1:] + a1v[:-1]) - np.diff(a2v) / dy
    full = np.concatenate([[0.0], flux, [0.0]])  # reflecting ends
    new_vals = v.values - (dt / dy) * np.diff(full)
    return DensitySnapshot(t=v.t + dt, grid=y, values=new_vals, origin="stepped")


def propagate_fokker_planck(v0: DensitySnapshot, drift: GridFunction,
                            diffusion: GridFunction, times,
                            dt: float | None = None, safety: float = 0.9) -> list:
    """Explicit trajectory through the requested times.

    dt defaults to safety * stability limit and is shrunk to divide each
    inter-target interval evenly.
    """
    y = v0.grid
    dy = float(y[1] - y[0])
    limit = 0.5 * dy * dy / float(diffusion.values.max())
    if dt is None:
        dt = safety * limit
    if dt > limit:
        raise StabilityError(f"dt={dt:.3e} exceeds the stability limit {limit:.3e}")
    times = sorted(float(t) for t in times)
    out = []
    current = v0
    for t in times:
        if t < current.t - 1e-12:
            raise ValidationError(f"target time {t} precedes the current state")
        gap = t - current.t
        if gap > 0.0:
            steps = max(1, int(math.ceil(gap / dt)))
            h = gap / steps
            for _ in range(steps):
                current = fokker_planck_step(current, drift, diffusion, h)
            current = DensitySnapshot(t=t, grid=y, values=current.values,
                                      origin="stepped")
        out.append(current)
    return out


def constant_field(grid: np.ndarray, value: float) -> GridFunction:
    """Constant coefficient field on a solver grid."""
    g = np.asarray(grid, dtype=float)
    return GridFunction(grid=g, values=np.full_like(g, float(value)))
