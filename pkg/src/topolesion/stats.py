"""Persistence statistics: fixed-length summaries of a diagram.

Each diagram is reduced to 19 numbers.  For the midlife multiset and then
the normalized-lifespan multiset: mean, sample standard deviation, skewness,
Pearson kurtosis, median, 25th and 75th percentiles and interquartile range.
These 16 values are followed by the persistence entropy, the total
persistence and the number of points.  Infinite deaths count as 256.
"""

from __future__ import annotations

import numpy as np
from scipy import stats as sps

from .image_io import rgb_channels, rgb_to_xyz
from .persistence import ESSENTIAL_DEATH, PersistenceDiagram, sublevel_persistence

DISTRIBUTION_STATS = ("mean", "std", "skew", "kurtosis", "median", "q25", "q75", "iqr")
PS_FIELDS = (
    tuple(f"midlife_{s}" for s in DISTRIBUTION_STATS)
    + tuple(f"lifespan_{s}" for s in DISTRIBUTION_STATS)
    + ("entropy", "total_persistence", "count")
)
PS_LENGTH = len(PS_FIELDS)


def total_persistence(dgm: PersistenceDiagram) -> float:
    pts = dgm.finite_points(ESSENTIAL_DEATH)
    return float(np.sum(pts[:, 1] - pts[:, 0]))


def midlife_set(dgm: PersistenceDiagram) -> np.ndarray:
    pts = dgm.finite_points(ESSENTIAL_DEATH)
    return (pts[:, 0] + pts[:, 1]) / 2


def lifespan_set(dgm: PersistenceDiagram) -> np.ndarray:
    pts = dgm.finite_points(ESSENTIAL_DEATH)
    life = pts[:, 1] - pts[:, 0]
    return life / life.sum() if len(life) else life


def persistence_entropy(dgm: PersistenceDiagram) -> float:
    p = lifespan_set(dgm)
    return float(-np.sum(p * np.log(p))) if len(p) else 0.0


def describe(values: np.ndarray) -> np.ndarray:
    """The eight distribution statistics of ``values`` (zeros when empty).

    Spread and shape statistics of fewer than two values, or of constant
    values, are reported as 0.
    """
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        return np.zeros(len(DISTRIBUTION_STATS))
    q25, median, q75 = np.percentile(values, [25, 50, 75])
    if len(values) > 1 and np.ptp(values) > 0:
        std = np.std(values, ddof=1)
        skew = sps.skew(values)
        kurt = sps.kurtosis(values, fisher=False)
    else:
        std = skew = kurt = 0.0
    return np.array([values.mean(), std, skew, kurt, median, q25, q75, q75 - q25])


def ps_vector(dgm: PersistenceDiagram) -> np.ndarray:
    if len(dgm) == 0:
        return np.zeros(PS_LENGTH)
    return np.concatenate(
        [
            describe(midlife_set(dgm)),
            describe(lifespan_set(dgm)),
            [persistence_entropy(dgm), total_persistence(dgm), float(len(dgm))],
        ]
    )


def ps_from_diagrams(channel_diagrams) -> np.ndarray:
    """Concatenate PS vectors of ``[(P0, P1), ...]`` in channel order."""
    return np.concatenate([ps_vector(d) for pair in channel_diagrams for d in pair])


def ps_rgb(img: np.ndarray) -> np.ndarray:
    return ps_from_diagrams([sublevel_persistence(ch) for ch in rgb_channels(img)])


def ps_xyz(img: np.ndarray) -> np.ndarray:
    return ps_from_diagrams([sublevel_persistence(ch) for ch in rgb_to_xyz(img)])


def ps_names(prefix: str, channels) -> list[str]:
    return [f"{prefix}_{ch}_dim{k}_{f}" for ch in channels for k in (0, 1) for f in PS_FIELDS]


PS_RGB_NAMES = ps_names("ps_rgb", "RGB")
PS_XYZ_NAMES = ps_names("ps_xyz", "XYZ")
