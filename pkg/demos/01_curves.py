"""Build the preset curves, check the chord-length law, invert points.

Run:  python3 demos/01_curves.py
Writes demos/out/curves.png
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fractalkinetics import (
    PRESET_GENERATORS,
    build_curve,
    chord_lengths,
    invert,
    koch_generator,
    locate,
)

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

print("preset generators and their similarity dimensions")
for name, factory in PRESET_GENERATORS.items():
    spec = factory()
    print(f"  {name:15s} N={spec.segment_count}  r={spec.ratios[0]:.4f}  "
          f"dim={spec.similarity_dimension():.6f}")

print("\nchord-length law: every level-m chord of the triadic curve "
      "has length 3^-m")
for m in (1, 3, 5):
    curve = build_curve(koch_generator(), level=m)
    lens = chord_lengths(curve)
    print(f"  level {m}: {curve.knot_count:5d} knots, "
          f"chord length {lens[0]:.10f} (want {3.0 ** -m:.10f}), "
          f"spread {np.ptp(lens):.2e}")

curve = build_curve(koch_generator(), level=6)
apex = locate(curve, 0.5)
print(f"\nparameter 0.5 lands on the apex: {apex}")
print(f"inverting the apex returns u = {invert(curve, apex):.12f}")

fig, axes = plt.subplots(2, 2, figsize=(10, 6))
for ax, (name, factory) in zip(axes.ravel(), PRESET_GENERATORS.items()):
    level = 1 if name == "identity" else 5
    c = build_curve(factory(), level=level)
    ax.plot(c.points[:, 0], c.points[:, 1], lw=0.7)
    ax.set_title(f"{name} (level {level}, {c.knot_count} knots)")
    ax.set_aspect("equal")
fig.tight_layout()
path = os.path.join(OUT, "curves.png")
fig.savefig(path, dpi=120)
print(f"\nwrote {path}")
