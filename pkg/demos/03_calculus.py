"""Differentiate and integrate along a fractal curve via the conjugate
coordinate, then check the fundamental theorem and a Taylor expansion.

Run:  python3 demos/03_calculus.py
Writes demos/out/calculus.png
"""

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fractalkinetics import (
    CurveFunction,
    build_curve,
    build_staircase,
    fractal_derivative_function,
    fractal_integral,
    koch_generator,
    point_at_conjugate,
    running_integral,
    taylor_eval,
    to_conjugate,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

print("fundamental theorem error vs refinement level, f with exp conjugate:")
for level in (4, 5, 6, 7):
    curve = build_curve(koch_generator(), level=level)
    st = build_staircase(curve)
    f = CurveFunction(curve=curve, knot_values=np.exp(st.values))
    df = fractal_derivative_function(f, curve, st)
    got = fractal_integral(df, 0.0, 1.0, curve, st)
    want = math.exp(st.total) - 1.0
    print(f"  level {level}: integral of derivative = {got:.12f}, "
          f"f(end)-f(start) = {want:.12f}, err {abs(got - want):.2e}")

curve = build_curve(koch_generator(), level=6)
st = build_staircase(curve)
f = CurveFunction(curve=curve, knot_values=np.sin(4.0 * st.values))
acc = running_integral(f, curve, st)
rec = fractal_derivative_function(acc, curve, st)
err = np.max(np.abs(rec.values_at_knots() - f.values_at_knots()))
print(f"\nderivative of the running integral recovers f: max err {err:.2e}")

print("\nTaylor sums for the exp-conjugate function, base at the curve "
      "start, target at y=0.3:")
target = point_at_conjugate(st, curve, 0.3)
fexp = CurveFunction(curve=curve, knot_values=np.exp(st.values))
for order in range(0, 7):
    got = taylor_eval(fexp, curve.start(), target, order=order,
                      curve=curve, staircase=st)
    print(f"  order {order}: {got:.9f}  (err {abs(got - math.exp(0.3)):.2e})")

g = to_conjugate(f, curve, st)
dg = to_conjugate(fractal_derivative_function(f, curve, st), curve, st)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
ax1.plot(g.grid, g.values, lw=0.8, label="g = conjugate of f")
ax1.plot(dg.grid, dg.values, lw=0.8, label="conjugate of Df")
ax1.plot(g.grid, 4.0 * np.cos(4.0 * g.grid), "k--", lw=0.6,
         label="4 cos(4y) reference")
ax1.set_xlabel("conjugate coordinate y")
ax1.legend()
ax1.set_title("derivative taken along the curve, seen in y")

sc = ax2.scatter(curve.points[::4, 0], curve.points[::4, 1],
                 c=f.values_at_knots()[::4], s=2, cmap="viridis")
fig.colorbar(sc, ax=ax2, label="f")
ax2.set_aspect("equal")
ax2.set_title("the same function living on the curve")
fig.tight_layout()
path = os.path.join(OUT, "calculus.png")
fig.savefig(path, dpi=120)
print(f"\nwrote {path}")
