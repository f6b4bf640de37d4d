"""The four feature sets on a synthetic lesion image."""

import numpy as np

from topolesion.features import ALL_ORDER, extract, feature_names
from topolesion.synthetic import lesion_image

img, _ = lesion_image(seed=3, size=96)

for name in ALL_ORDER:
    v = extract(img, name)
    print(f"{name:7s} {len(v):5d} values, first name {feature_names(name)[0]}")

full = extract(img, "all")
print("all    ", len(full), "values")

# the persistence statistics of the red channel, dimension 0
names = feature_names("ps-rgb")[:19]
for n, v in zip(names, extract(img, "ps-rgb")[:19]):
    print(f"  {n:40s} {v:10.4f}")
assert np.all(np.isfinite(full))
