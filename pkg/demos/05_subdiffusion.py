"""The two headline observables: the density-shape slope against distance
and the mean-squared displacement exponent, on three curves.

Run:  python3 demos/05_subdiffusion.py
Writes demos/out/subdiffusion.png
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fractalkinetics import (
    build_curve,
    build_staircase,
    density_shape_data,
    density_shape_time,
    fit_power_law,
    koch_generator,
    msd_exponent,
    msd_series,
    msd_time_window,
    quadratic_koch_generator,
    segment_generator,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

A = 0.25
cases = [
    ("triadic curve", koch_generator(), 7, 1.5),
    ("line segment", segment_generator(), 10, 1.5),
    ("quadratic curve", quadratic_koch_generator(), 5, 2.0),
]

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))

print("density-shape slope: log|log V| vs log|theta| at the time where "
      "the prefactor is 1")
print("  a straight line of slope 2 alpha signals the stretched "
      "exponential exp(-c |theta|^(2 alpha))")
for name, gen, level, _ in cases:
    curve = build_curve(gen, level=level)
    st = build_staircase(curve)
    lx, ly = density_shape_data(density_shape_time(A), A, curve, st)
    fit = fit_power_law(lx, ly, already_log=True)
    ax1.plot(lx, ly, ".", ms=2, label=f"{name}: slope {fit.slope:.3f}")
    print(f"  {name:16s} slope={fit.slope:.4f}  "
          f"2*dim={2 * gen.similarity_dimension():.4f}  "
          f"r2={fit.r_squared:.5f}")
ax1.set_xlabel("log |theta|")
ax1.set_ylabel("log |log V|")
ax1.set_title("density shape")
ax1.legend()

print("\nmean-squared displacement <L^2>(t) ~ t^mu; mu = 1/dim makes "
      "motion on a rougher curve slower")
for name, gen, level, decades in cases:
    curve = build_curve(gen, level=level)
    st = build_staircase(curve)
    times = msd_time_window(A, st, decades=decades, count=24)
    series = msd_series(times, A, curve, st)
    fit = msd_exponent(series)
    dim = curve.generator.similarity_dimension()
    ax2.loglog(series.times, series.msd, "o-", ms=3, lw=0.8,
               label=f"{name}: mu {fit.slope:.3f}")
    print(f"  {name:16s} mu={fit.slope:.4f}  1/dim={1.0 / dim:.4f}  "
          f"r2={fit.r_squared:.5f}")
ax2.set_xlabel("t")
ax2.set_ylabel("mean squared displacement")
ax2.set_title("subdiffusion on self-similar curves")
ax2.legend()
fig.tight_layout()
path = os.path.join(OUT, "subdiffusion.png")
fig.savefig(path, dpi=120)
print(f"\nwrote {path}")
