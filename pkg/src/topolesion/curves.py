"""Persistence curves sampled on the threshold grid t = 0..254."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .image_io import rgb_channels, rgb_to_xyz
from .persistence import ESSENTIAL_DEATH, PersistenceDiagram, sublevel_persistence

GRID = np.arange(255)
CURVE_LENGTH = len(GRID)


def _sum(values: np.ndarray) -> float:
    return float(np.sum(values)) if len(values) else 0.0


def persistence_curve(
    dgm: PersistenceDiagram,
    psi: Callable[[PersistenceDiagram, np.ndarray, np.ndarray, int], np.ndarray],
    stat: Callable[[np.ndarray], float] = _sum,
) -> np.ndarray:
    """Evaluate ``t -> stat({psi(dgm; b, d, t) : b <= t < d})`` on the grid.

    ``psi`` receives arrays of births and deaths (infinite deaths already
    replaced by 256) and returns one value per point.  ``stat`` of an empty
    multiset must be 0.
    """
    pts = dgm.finite_points(ESSENTIAL_DEATH)
    b, d = pts[:, 0], pts[:, 1]
    out = np.zeros(CURVE_LENGTH)
    for t in GRID:
        alive = (b <= t) & (d > t)
        out[t] = stat(np.asarray(psi(dgm, b[alive], d[alive], int(t)), dtype=np.float64)) if alive.any() else 0.0
    return out


def betti_curve(dgm: PersistenceDiagram) -> np.ndarray:
    # closed form of persistence_curve with psi = 1 and stat = sum: since b < d,
    # #{b <= t < d} = #{b <= t} - #{d <= t}
    born = np.searchsorted(np.sort(dgm.births), GRID, side="right")
    dead = np.searchsorted(np.sort(dgm.deaths), GRID, side="right")
    return (born - dead).astype(np.float64)


def entropy_curve(dgm: PersistenceDiagram) -> np.ndarray:
    """Sum of ``-(l/L) ln(l/L)`` over points alive at t, L the total persistence."""
    pts = dgm.finite_points(ESSENTIAL_DEATH)
    if len(pts) == 0:
        return np.zeros(CURVE_LENGTH)
    life = pts[:, 1] - pts[:, 0]
    q = life / life.sum()
    terms = -q * np.log(q)
    alive = (pts[:, 0][None, :] <= GRID[:, None]) & (pts[:, 1][None, :] > GRID[:, None])
    return alive.astype(np.float64) @ terms


def betti_curves(channel_diagrams) -> np.ndarray:
    return np.concatenate([betti_curve(d) for pair in channel_diagrams for d in pair])


def betti_entropy_curves(p0: PersistenceDiagram, p1: PersistenceDiagram) -> np.ndarray:
    return np.concatenate([betti_curve(p0), betti_curve(p1), entropy_curve(p0), entropy_curve(p1)])


def pc_rgb(img: np.ndarray) -> np.ndarray:
    """Betti curves b0, b1 of R, G and B, concatenated (1530 values)."""
    return betti_curves([sublevel_persistence(ch) for ch in rgb_channels(img)])


def pc_xyz(img: np.ndarray) -> np.ndarray:
    """b0, b1, E0, E1 of the X channel (1020 values)."""
    x, _, _ = rgb_to_xyz(img)
    return betti_entropy_curves(*sublevel_persistence(x))


def curve_names(prefix: str, channels, kinds) -> list[str]:
    return [f"{prefix}_{ch}_{kind}_t{t}" for ch in channels for kind in kinds for t in GRID]


PC_RGB_NAMES = curve_names("pc_rgb", "RGB", ("betti0", "betti1"))
PC_XYZ_NAMES = curve_names("pc_xyz", "X", ("betti0", "betti1", "entropy0", "entropy1"))
