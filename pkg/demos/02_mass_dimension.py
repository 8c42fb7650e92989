"""Mass sums across refinement levels, the dimension estimate, and the
staircase coordinate.

Run:  python3 demos/02_mass_dimension.py
Writes demos/out/mass_dimension.png
"""

import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fractalkinetics import (
    build_curve,
    build_staircase,
    estimate_dimension,
    koch_generator,
    mass,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

ALPHA = math.log(4.0) / math.log(3.0)
curve = build_curve(koch_generator(), level=8)

print("level sums of |chord|^alpha / Gamma(alpha+1) for three exponents:")
print("  below the dimension they grow, above they decay, at it they freeze")
for alpha in (1.1, ALPHA, 1.4):
    est = mass(curve, alpha=alpha)
    sums = [s for _, s in est.level_values]
    print(f"  alpha={alpha:.4f}  first={sums[0]:.6f}  last={sums[-1]:.6f}  "
          f"classified {est.classification}")

est = estimate_dimension(curve, 1.0, 2.0, tol=1e-3)
print(f"\nbisection on the growth/decay transition: "
      f"alpha_hat={est.alpha_hat:.6f} (closed form {ALPHA:.6f})")

staircase = build_staircase(curve)
print(f"staircase total mass {staircase.total:.12f} "
      f"= 1/Gamma(1+alpha) = {1.0 / math.gamma(1.0 + ALPHA):.12f}")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
for alpha in (1.1, ALPHA, 1.4):
    est_a = mass(curve, alpha=alpha)
    levels = [m for m, _ in est_a.level_values]
    sums = [s for _, s in est_a.level_values]
    ax1.semilogy(levels, sums, "o-", label=f"alpha={alpha:.3f}")
ax1.set_xlabel("refinement level m")
ax1.set_ylabel("vertex-aligned sum")
ax1.set_title("mass sums: growth / frozen / decay")
ax1.legend()

u = curve.params[:: 16]
ax2.plot(u, staircase.values[:: 16], lw=0.8)
ax2.set_xlabel("parameter u")
ax2.set_ylabel("S(u)")
ax2.set_title("cumulative-mass staircase (affine here)")
fig.tight_layout()
path = os.path.join(OUT, "mass_dimension.png")
fig.savefig(path, dpi=120)
print(f"\nwrote {path}")
