"""Command-line interface.

One executable with subcommands over the library. Parameters resolve from
an optional JSON config file overridden by flags (flags win). Every CSV
carries a one-line `#` provenance comment with the digest of the resolved
configuration, so identical configurations produce byte-identical output.
A JSON run report (resolved parameters, wall time, warnings, output
digests) goes to stderr.

Exit codes: 0 success, 2 validation or usage failure, 3 numerical guard.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .curves import PRESET_GENERATORS, GeneratorSpec, build_curve
from .errors import NumericalGuardError, ValidationError
from .kinetics import (CONVENTIONS, analytic_snapshot, constant_field,
                       diffusion_density, gaussian_kernel,
                       propagate_chapman_kolmogorov, propagate_fokker_planck,
                       transitional_moments, uniform_grid)
from .mass import build_staircase, estimate_dimension, mass
from .observables import (density_shape_data, density_shape_time,
                          fit_power_law, msd_series, msd_time_window)
from .util import config_digest, file_digest, fmt17, parallel_map, write_csv_rows

SEED_TIME = 1e-3  # stepped solvers start from the closed form here


def _fmt(value) -> str:
    if isinstance(value, float):
        return fmt17(value)
    return str(value)


class _Run:
    """Parameter resolution plus the run report accumulator."""

    def __init__(self, command: str, args, config: dict):
        self.command = command
        self.args = args
        self.config = config
        self.resolved = {"command": command}
        self.warnings = []
        self.outputs = {}
        self._deferred = []

    def get(self, key, default=None, required=False):
        val = getattr(self.args, key, None)
        if val is None:
            val = self.config.get(key, default)
        if required and val is None:
            flag = "--" + key.replace("_", "-")
            raise ValidationError(f"missing required parameter {flag}")
        self.resolved[key] = val
        return val

    def get_float(self, key, default=None, required=False):
        val = self.get(key, default, required)
        return None if val is None else float(val)

    def get_int(self, key, default=None):
        return int(self.get(key, default))

    def choice(self, key, default, options):
        val = str(self.get(key, default))
        if val not in options:
            raise ValidationError(f"{key} must be one of {sorted(options)}, got {val!r}")
        self.resolved[key] = val
        return val

    def flag(self, key) -> bool:
        val = bool(getattr(self.args, key, False)) or bool(self.config.get(key, False))
        self.resolved[key] = val
        return val

    def warn(self, message: str):
        self.warnings.append(message)

    def say(self, key, value):
        """Unconditional key=value line on stdout."""
        print(f"{key}={_fmt(value)}")

    def echo(self, key, value):
        """key=value queued for stdout, flushed only when the CSV goes to
        a file (a stdout CSV must stay clean)."""
        self._deferred.append((key, value))

    def emit(self, header, rows, extra_comments=()):
        out = self.resolved.get("out") or "-"
        # the digest covers what determines the data, not where it lands
        digest = config_digest({k: v for k, v in self.resolved.items()
                                if k not in ("out", "config")})
        provenance = (f"fractalkinetics v{__version__} {self.command} "
                      f"config={digest}")
        comments = [provenance, *extra_comments]
        if out == "-":
            write_csv_rows(sys.stdout, header, rows, comments)
        else:
            with open(out, "w") as fh:
                write_csv_rows(fh, header, rows, comments)
            self.outputs[out] = file_digest(out)
            for key, value in self._deferred:
                self.say(key, value)
        self._deferred.clear()

    def report(self, wall_seconds: float):
        body = {"command": self.command,
                "resolved": self.resolved,
                "wall_time_s": round(wall_seconds, 6),
                "warnings": list(dict.fromkeys(self.warnings)),
                "outputs": self.outputs}
        print(json.dumps(body, sort_keys=True, default=str), file=sys.stderr)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ValidationError("config must be a JSON object of parameter defaults")
    return config


def _as_times(value) -> list | None:
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
        if not parts:
            raise ValidationError("--t needs a comma-separated list of times")
        return [float(p) for p in parts]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


def _resolve_curve(run: _Run, default_level: int = 5):
    preset = run.get("curve")
    spec_path = run.get("curve_spec")
    if preset and spec_path:
        raise ValidationError("give --curve or --curve-spec, not both")
    if spec_path:
        with open(spec_path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or "vertices" not in data:
            raise ValidationError("curve spec file needs a 'vertices' array")
        gen = GeneratorSpec.from_vertices(data["vertices"],
                                          name=str(data.get("name", "custom")))
    else:
        name = preset or "koch"
        factory = PRESET_GENERATORS.get(name)
        if factory is None:
            raise ValidationError(f"unknown curve preset {name!r}; choose from "
                                  f"{sorted(PRESET_GENERATORS)}")
        run.resolved["curve"] = name
        gen = factory()
    level = run.get_int("level", default_level)
    a0 = run.get_float("a0", 0.0)
    b0 = run.get_float("b0", 1.0)
    return build_curve(gen, level, a0=a0, b0=b0)


def _check_alpha(alpha: float | None, curve) -> float | None:
    if alpha is not None and not 1.0 <= alpha <= curve.embedding_dim:
        raise ValidationError(
            f"alpha={alpha:g} outside [1, {curve.embedding_dim}] "
            "(the embedding dimension)")
    return alpha


def _cmd_curve(run: _Run):
    curve = _resolve_curve(run)
    run.get("out", "-")
    rows = ((float(u), float(p[0]), float(p[1]))
            for u, p in zip(curve.params, curve.points))
    run.emit(("u", "x0", "x1"),
             rows,
             [f"generator={curve.generator.name} level={curve.level}"])


def _cmd_mass(run: _Run):
    curve = _resolve_curve(run, default_level=6)
    alpha = _check_alpha(run.get_float("alpha", required=True), curve)
    a = run.get_float("a", curve.a0)
    b = run.get_float("b", curve.b0)
    run.get("out", "-")
    est = mass(curve, alpha, a=a, b=b)
    if est.max_snap_distance > 0.0:
        run.warn(f"interval snapped outward by up to "
                 f"{est.max_snap_distance:.3e} in the parameter")
    run.echo("value", est.value)
    run.echo("classification", est.classification)
    run.emit(("level", "sum"),
             est.level_values,
             [f"classification={est.classification}",
              f"extrapolated={_fmt(est.extrapolated)}",
              f"value={_fmt(est.value)}"])


def _cmd_dim(run: _Run):
    curve = _resolve_curve(run, default_level=8)
    tol = run.get_float("tol", 1e-3)
    out = run.get("out")
    est = estimate_dimension(curve, tol=tol)
    run.say("alpha_hat", est.alpha_hat)
    if out:
        rows = [(float(a), label) for a, _, label in est.growth_diagnostics]
        run.emit(("alpha", "classification"),
                 rows,
                 [f"alpha_hat={fmt17(est.alpha_hat)}",
                  f"bracket={fmt17(est.bracket[0])},{fmt17(est.bracket[1])}"])


def _cmd_staircase(run: _Run):
    curve = _resolve_curve(run)
    alpha = _check_alpha(run.get_float("alpha"), curve)
    run.get("out", "-")
    table = build_staircase(curve, alpha=alpha)
    rows = zip((float(u) for u in table.knots), (float(s) for s in table.values))
    run.emit(("u", "S"),
             rows,
             [f"alpha={fmt17(table.alpha)}", f"total={fmt17(table.total)}"])


def _mirrored_samples(curve, staircase, two_sided: bool):
    """Knot samples (u, y, point); two_sided reflects the curve through its
    start so the conjugate axis extends to negative y."""
    u = np.asarray(curve.params, dtype=float)
    y = np.asarray(staircase.values, dtype=float)
    pts = np.asarray(curve.points, dtype=float)
    if not two_sided:
        return u, y, pts
    u_all = np.concatenate([(2.0 * curve.a0 - u[1:])[::-1], u])
    y_all = np.concatenate([(-y[1:])[::-1], y])
    p_all = np.concatenate([(2.0 * pts[0] - pts[1:])[::-1], pts])
    return u_all, y_all, p_all


def _cmd_diffuse(run: _Run):
    curve = _resolve_curve(run)
    diffusion = run.get_float("A", 0.25)
    if diffusion <= 0.0:
        raise ValidationError("A must be positive")
    convention = run.choice("convention", "gauss", CONVENTIONS)
    times = _as_times(run.get("t", required=True))
    run.resolved["t"] = times
    solver = run.choice("solver", "analytic", ("analytic", "ck", "fp"))
    grid_points = run.get_int("grid", 2048)
    two_sided = run.flag("two_sided")
    run.get("out", "-")
    if any(t <= 0.0 for t in times):
        raise ValidationError("all times must be positive")
    times = sorted(times)
    staircase = build_staircase(curve)
    u, y, pts = _mirrored_samples(curve, staircase, two_sided)

    if solver == "analytic":
        blocks = parallel_map(
            lambda t: diffusion_density(y, t, diffusion, convention), times)
    else:
        if times[0] < SEED_TIME:
            raise ValidationError(
                f"stepped solvers seed from the closed form at t={SEED_TIME:g}; "
                "request times at or after it")
        # the stepped dynamics are fixed; the requested convention is a
        # rescaling of the coefficient (gauss accrues variance A t, half the
        # pde rate, so its effective coefficient is A/2)
        a_eff = diffusion if convention == "pde" else diffusion / 2.0
        width_max = np.sqrt(2.0 * a_eff * times[-1])
        half_span = max(staircase.total, 8.0 * float(width_max))
        grid = uniform_grid(-half_span, half_span, grid_points)
        seed = analytic_snapshot(grid, SEED_TIME, a_eff, "pde")
        if solver == "ck":
            snaps = propagate_chapman_kolmogorov(seed, times, diffusion=a_eff)
        else:
            drift = constant_field(grid, 0.0)
            diff = constant_field(grid, a_eff)
            snaps = propagate_fokker_planck(seed, drift, diff, times)
        blocks = [np.interp(y, grid, s.values) for s in snaps]

    def rows():
        for t, vals in zip(times, blocks):
            for k in range(len(u)):
                yield (float(t), float(u[k]), float(y[k]),
                       float(pts[k, 0]), float(pts[k, 1]), float(vals[k]))

    run.emit(("t", "u", "y", "x0", "x1", "V"),
             rows(),
             [f"solver={solver} convention={convention} A={fmt17(diffusion)}"])


def _cmd_moments(run: _Run):
    tau = run.get_float("tau", required=True)
    diffusion = run.get_float("A", 0.25)
    drift = run.get_float("drift", 0.0)
    n_max = run.get_int("n_max", 4)
    num_points = run.get_int("points", 2001)
    domain_arg = run.get("domain")
    if domain_arg is not None:
        if isinstance(domain_arg, str):
            parts = [float(p) for p in domain_arg.split(",") if p.strip()]
        else:
            parts = [float(p) for p in domain_arg]
        if len(parts) != 2:
            raise ValidationError("--domain needs exactly two numbers lo,hi")
        domain = (parts[0], parts[1])
        run.resolved["domain"] = list(domain)
        lo, hi = domain
    else:
        curve = _resolve_curve(run)
        staircase = build_staircase(curve)
        domain = staircase
        lo, hi = staircase.span()
    center = run.get_float("center", 0.5 * (lo + hi))
    run.get("out", "-")
    kernel = gaussian_kernel(tau, diffusion=diffusion, drift=drift)
    ms = transitional_moments(kernel, center, n_max, domain,
                              num_points=num_points)
    run.echo("drift_coefficient", ms.coefficients.get(1, 0.0))
    run.echo("diffusion_coefficient", ms.coefficients.get(2, 0.0))
    rows = [(n, ms.moments[n], ms.coefficients[n]) for n in sorted(ms.moments)]
    run.emit(("n", "moment", "coefficient"),
             rows,
             [f"tau={fmt17(tau)} center={fmt17(center)} m0={fmt17(ms.m0)}",
              f"boundary_margin_sqrt_tau={fmt17(ms.boundary_margin)}",
              f"drift_coefficient={fmt17(ms.coefficients.get(1, 0.0))}",
              f"diffusion_coefficient={fmt17(ms.coefficients.get(2, 0.0))}"])


def _cmd_fig1(run: _Run):
    curve = _resolve_curve(run, default_level=7)
    diffusion = run.get_float("A", 0.25)
    convention = run.choice("convention", "gauss", CONVENTIONS)
    t = run.get_float("t", density_shape_time(diffusion))
    exclusion = run.get_float("exclusion", 1e-3)
    run.get("out", "-")
    staircase = build_staircase(curve)
    log_theta, log_log_v = density_shape_data(t, diffusion, curve, staircase,
                                              convention=convention,
                                              exclusion=exclusion)
    fit = fit_power_law(log_theta, log_log_v, already_log=True)
    run.echo("slope", fit.slope)
    run.echo("r_squared", fit.r_squared)
    run.emit(("log_abs_theta", "log_abs_log_V"),
             zip(log_theta, log_log_v),
             [f"t={fmt17(t)} A={fmt17(diffusion)} convention={convention}",
              f"fit: slope={fmt17(fit.slope)} intercept={fmt17(fit.intercept)} "
              f"r_squared={fmt17(fit.r_squared)} points={fit.point_count}"])


def _cmd_msd(run: _Run):
    curve = _resolve_curve(run, default_level=7)
    diffusion = run.get_float("A", 0.25)
    convention = run.choice("convention", "gauss", CONVENTIONS)
    times = _as_times(run.get("t"))
    decades = run.get_float("decades", 1.5)
    count = run.get_int("count", 24)
    safety = run.get_float("safety", 0.98)
    run.get("out", "-")
    staircase = build_staircase(curve)
    if times is None:
        times = msd_time_window(diffusion, staircase, decades=decades,
                                count=count, safety=safety,
                                convention=convention)
    run.resolved["t"] = [float(t) for t in times]
    series = msd_series(times, diffusion, curve, staircase,
                        convention=convention)
    fit = fit_power_law(series.times, series.msd)
    run.echo("exponent", fit.slope)
    run.echo("r_squared", fit.r_squared)
    run.emit(("t", "msd"),
             zip((float(t) for t in series.times),
                 (float(v) for v in series.msd)),
             [f"A={fmt17(diffusion)} convention={convention}",
              f"fit: slope={fmt17(fit.slope)} intercept={fmt17(fit.intercept)} "
              f"r_squared={fmt17(fit.r_squared)} points={fit.point_count}"])


def _read_table(path: str):
    """Two-or-more-column CSV with optional `#` comments and header row."""
    fh = sys.stdin if path == "-" else open(path)
    try:
        rows = []
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if header is None and not rows:
                try:
                    rows.append([float(c) for c in cells])
                except ValueError:
                    header = cells
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ValidationError(f"non-numeric data row: {line}") from exc
    finally:
        if fh is not sys.stdin:
            fh.close()
    if not rows:
        raise ValidationError("no data rows found")
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() < 2:
        raise ValidationError("need a rectangular table with at least two columns")
    return header, np.asarray(rows, dtype=float)


def _column_index(spec, header, default: int, table_width: int) -> int:
    if spec is None:
        return default
    if header and str(spec) in header:
        return header.index(str(spec))
    try:
        idx = int(spec)
    except ValueError:
        raise ValidationError(f"unknown column {spec!r}")
    if not 0 <= idx < table_width:
        raise ValidationError(f"column index {idx} out of range")
    return idx


def _cmd_fit(run: _Run):
    path = run.get("infile", "-")
    already_log = run.flag("already_log")
    range_arg = run.get("range")
    fit_range = None
    if range_arg is not None:
        if isinstance(range_arg, str):
            parts = [float(p) for p in range_arg.split(",") if p.strip()]
        else:
            parts = [float(p) for p in range_arg]
        if len(parts) != 2:
            raise ValidationError("--range needs exactly two numbers lo,hi")
        fit_range = (parts[0], parts[1])
        run.resolved["range"] = list(fit_range)
    header, table = _read_table(path)
    x_idx = _column_index(run.get("x_col"), header, 0, table.shape[1])
    y_idx = _column_index(run.get("y_col"), header, 1, table.shape[1])
    fit = fit_power_law(table[:, x_idx], table[:, y_idx],
                        fit_range=fit_range, already_log=already_log)
    if run.get("out") is None:
        run.say("slope", fit.slope)
        run.say("intercept", fit.intercept)
        run.say("r_squared", fit.r_squared)
        run.say("point_count", fit.point_count)
    else:
        run.echo("slope", fit.slope)
        run.echo("intercept", fit.intercept)
        run.echo("r_squared", fit.r_squared)
        run.echo("point_count", fit.point_count)
        run.emit(("slope", "intercept", "r_squared", "point_count"),
                 [(fit.slope, fit.intercept, fit.r_squared, fit.point_count)])


_HANDLERS = {
    "curve": _cmd_curve,
    "mass": _cmd_mass,
    "dim": _cmd_dim,
    "staircase": _cmd_staircase,
    "diffuse": _cmd_diffuse,
    "moments": _cmd_moments,
    "fig1": _cmd_fig1,
    "msd": _cmd_msd,
    "fit": _cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalkinetics",
        description="Calculus and diffusion kinetics on self-similar curves.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameter defaults; flags win")
    common.add_argument("--out", help="output CSV path, '-' for stdout")

    curve_args = argparse.ArgumentParser(add_help=False)
    curve_args.add_argument("--curve",
                            help="preset: " + ", ".join(sorted(PRESET_GENERATORS)))
    curve_args.add_argument("--curve-spec", dest="curve_spec",
                            help="JSON file with a 'vertices' array")
    curve_args.add_argument("--level", type=int, help="refinement depth")
    curve_args.add_argument("--a0", type=float, help="parameter range start")
    curve_args.add_argument("--b0", type=float, help="parameter range end")

    p = sub.add_parser("curve", parents=[common, curve_args],
                       help="emit the knot table of a refined curve")

    p = sub.add_parser("mass", parents=[common, curve_args],
                       help="subdivision mass sums for one exponent")
    p.add_argument("--alpha", type=float, help="mass exponent")
    p.add_argument("--a", type=float, help="interval start (default curve start)")
    p.add_argument("--b", type=float, help="interval end (default curve end)")

    p = sub.add_parser("dim", parents=[common, curve_args],
                       help="estimate the scaling dimension by bisection")
    p.add_argument("--tol", type=float, help="bisection half-width target")

    p = sub.add_parser("staircase", parents=[common, curve_args],
                       help="cumulative mass at every knot")
    p.add_argument("--alpha", type=float, help="override the mass exponent")

    p = sub.add_parser("diffuse", parents=[common, curve_args],
                       help="density on the curve at requested times")
    p.add_argument("--A", type=float, help="diffusion coefficient (default 0.25)")
    p.add_argument("--t", help="comma-separated times")
    p.add_argument("--solver", help="analytic, ck, or fp")
    p.add_argument("--grid", type=int, help="conjugate grid points for stepped solvers")
    p.add_argument("--convention", help="gauss or pde closed form")
    p.add_argument("--two-sided", dest="two_sided", action="store_true",
                   help="mirror the curve through its start")

    p = sub.add_parser("moments", parents=[common, curve_args],
                       help="transition-kernel displacement moments")
    p.add_argument("--tau", type=float, help="kernel time step")
    p.add_argument("--A", type=float, help="kernel diffusion (default 0.25)")
    p.add_argument("--drift", type=float, help="kernel drift velocity")
    p.add_argument("--n-max", dest="n_max", type=int, help="highest moment order")
    p.add_argument("--points", type=int, help="quadrature node count")
    p.add_argument("--center", type=float, help="conjugate center y'")
    p.add_argument("--domain", help="explicit conjugate domain lo,hi "
                                    "(default: the curve's staircase span)")

    p = sub.add_parser("fig1", parents=[common, curve_args],
                       help="density-shape profile in log-log coordinates")
    p.add_argument("--A", type=float, help="diffusion coefficient (default 0.25)")
    p.add_argument("--t", type=float,
                   help="observation time (default: unit-prefactor time)")
    p.add_argument("--convention", help="gauss or pde closed form")
    p.add_argument("--exclusion", type=float,
                   help="drop points with |log V| below this")

    p = sub.add_parser("msd", parents=[common, curve_args],
                       help="mean squared displacement versus time")
    p.add_argument("--A", type=float, help="diffusion coefficient (default 0.25)")
    p.add_argument("--t", help="comma-separated times (default: auto window)")
    p.add_argument("--convention", help="gauss or pde closed form")
    p.add_argument("--decades", type=float, help="auto-window width in decades")
    p.add_argument("--count", type=int, help="auto-window time count")
    p.add_argument("--safety", type=float, help="auto-window ceiling fraction")

    p = sub.add_parser("fit", parents=[common],
                       help="least-squares power law through CSV columns")
    p.add_argument("--in", dest="infile", help="input CSV path, '-' for stdin")
    p.add_argument("--x-col", dest="x_col", help="abscissa column name or index")
    p.add_argument("--y-col", dest="y_col", help="ordinate column name or index")
    p.add_argument("--range", help="fit window lo,hi on the abscissa")
    p.add_argument("--already-log", dest="already_log", action="store_true",
                   help="inputs are already logged")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        config = _load_config(getattr(args, "config", None))
        run = _Run(args.command, args, config)
        run.resolved["config"] = getattr(args, "config", None)
        _HANDLERS[args.command](run)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    run.report(time.perf_counter() - started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
