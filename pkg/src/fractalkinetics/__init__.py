"""Calculus and diffusion kinetics on self-similar curves.

The toolkit builds parametrized fractal polylines, measures their scaling
mass, and runs an ordinary-looking calculus in the cumulative-mass
coordinate: derivatives, integrals, Taylor expansion, kernel propagation
of densities, drift/diffusion coefficient extraction, and an explicit
drift-diffusion stepper, with the closed-form point-source solution and
its subdiffusion observables on top.
"""

__version__ = "0.1.0"

from .calculus import (CurveFunction, GridFunction, conjugate_derivatives_at,
                       fractal_derivative, fractal_derivative_function,
                       fractal_integral, from_conjugate, grid_derivative,
                       running_integral, taylor_eval, to_conjugate)
from .curves import (PRESET_GENERATORS, FractalCurve, GeneratorSpec,
                     build_curve, chord_lengths, identity_generator, invert,
                     koch_generator, locate, quadratic_koch_generator,
                     segment_generator)
from .errors import (AmbiguousScalingError, BoundaryEscapeError,
                     BoundaryProximityError, FractalKineticsError,
                     NumericalGuardError, OffCurveError, ResolutionError,
                     StabilityError, TimeRangeError, ValidationError)
from .kinetics import (CONVENTIONS, DensitySnapshot, MomentSet,
                       TransitionKernel, analytic_snapshot,
                       chapman_kolmogorov_step, constant_field, custom_kernel,
                       diffusion_density, diffusion_solution,
                       fokker_planck_step, gaussian_kernel,
                       kramers_moyal_coefficients, l1_distance,
                       propagate_chapman_kolmogorov, propagate_fokker_planck,
                       richardson_coefficients, transitional_moments,
                       transitional_moments_on_curve, uniform_grid)
from .mass import (DimensionEstimate, MassEstimate, StaircaseTable,
                   build_staircase, conjugate_coordinate, estimate_dimension,
                   mass, point_at_conjugate, random_refinement_sum)
from .observables import (MsdSeries, PowerLawFit, density_shape_data,
                          density_shape_time, fit_power_law,
                          max_admissible_time, msd_exponent, msd_series,
                          msd_time_window)

__all__ = [
    "__version__",
    # curves
    "GeneratorSpec", "FractalCurve", "PRESET_GENERATORS", "build_curve",
    "koch_generator", "quadratic_koch_generator", "segment_generator",
    "identity_generator", "locate", "invert", "chord_lengths",
    # mass and staircase
    "MassEstimate", "DimensionEstimate", "StaircaseTable", "mass",
    "estimate_dimension", "build_staircase", "conjugate_coordinate",
    "point_at_conjugate", "random_refinement_sum",
    # calculus
    "GridFunction", "CurveFunction", "to_conjugate", "from_conjugate",
    "grid_derivative", "fractal_derivative", "fractal_derivative_function",
    "fractal_integral", "running_integral", "conjugate_derivatives_at",
    "taylor_eval",
    # kinetics
    "CONVENTIONS", "TransitionKernel", "DensitySnapshot", "MomentSet",
    "gaussian_kernel", "custom_kernel", "diffusion_density",
    "diffusion_solution", "analytic_snapshot", "uniform_grid",
    "chapman_kolmogorov_step", "propagate_chapman_kolmogorov",
    "transitional_moments", "kramers_moyal_coefficients",
    "richardson_coefficients", "transitional_moments_on_curve",
    "fokker_planck_step", "propagate_fokker_planck", "constant_field",
    "l1_distance",
    # observables
    "PowerLawFit", "MsdSeries", "fit_power_law", "density_shape_data",
    "density_shape_time", "msd_series", "msd_time_window", "msd_exponent",
    "max_admissible_time",
    # errors
    "FractalKineticsError", "ValidationError", "OffCurveError",
    "NumericalGuardError", "ResolutionError", "BoundaryProximityError",
    "BoundaryEscapeError", "StabilityError", "TimeRangeError",
    "AmbiguousScalingError",
]
