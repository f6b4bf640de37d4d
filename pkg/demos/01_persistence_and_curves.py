"""Persistence diagrams of a small ring image, and the curves built from them."""

import numpy as np

from topolesion import betti, betti_curve, entropy_curve, sublevel_persistence, threshold

# a dark ring (value 20) around a brighter center (value 120) on a bright background
img = np.full((9, 9), 200.0)
img[2:7, 2:7] = 20
img[3:6, 3:6] = 120

p0, p1 = sublevel_persistence(img)
print("P0:", list(p0))  # one component born at 20, never dies
print("P1:", list(p1))  # one hole born at 20, filled at 120

# every threshold agrees with a direct count of components and holes
for t in (0, 20, 119, 120, 200):
    print(f"t={t:3d}  betti={betti(threshold(img, t))}  diagram says ({p0.alive_count(t)}, {p1.alive_count(t)})")

b1 = betti_curve(p1)
print("beta1 curve is 1 on", np.flatnonzero(b1).min(), "..", np.flatnonzero(b1).max())
print("entropy curve of P0 at t=100:", entropy_curve(p0)[100])
