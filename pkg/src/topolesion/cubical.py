"""Binary images as cubical complexes.

A white pixel is a closed unit square, so two white pixels touching at a
corner are connected: white components use 8-connectivity and the black
holes between them use 4-connectivity.  This module is deliberately simple
and serves as the ground truth for the persistence engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

_STRUCTURE = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray  # 0 = not part of any component
    count: int


def threshold(img: np.ndarray, t: int) -> np.ndarray:
    """Sublevel set ``{img <= t}`` as a boolean image (True = white)."""
    if not 0 <= t <= 255 or int(t) != t:
        raise ValueError(f"threshold must be an integer in [0, 255], got {t}")
    return np.asarray(img) <= t


def label_components(img: np.ndarray, connectivity: int = 8, target: str = "white") -> ComponentLabeling:
    """Label connected components of the white (or black) pixels.

    Labels run 1..count in order of each component's first pixel in a
    row-major scan.
    """
    if connectivity not in _STRUCTURE:
        raise ValueError("connectivity must be 4 or 8")
    if target not in ("white", "black"):
        raise ValueError("target must be 'white' or 'black'")
    bits = np.asarray(img, dtype=bool)
    if target == "black":
        bits = ~bits
    labels, count = ndimage.label(bits, structure=_STRUCTURE[connectivity])
    return ComponentLabeling(labels=labels, count=int(count))


def betti(img: np.ndarray) -> tuple[int, int]:
    """Return ``(b0, b1)`` of the cubical complex of white pixels."""
    bits = np.asarray(img, dtype=bool)
    b0 = label_components(bits, 8, "white").count
    black = label_components(bits, 4, "black")
    if black.count == 0:
        return b0, 0
    border = np.concatenate(
        [black.labels[0, :], black.labels[-1, :], black.labels[:, 0], black.labels[:, -1]]
    )
    unbounded = np.unique(border[border > 0])
    return b0, black.count - len(unbounded)


def euler_characteristic(img: np.ndarray) -> int:
    """Vertices - edges + faces of the closed-square complex of white pixels.

    Counted directly from cells, independently of any component labeling.
    """
    bits = np.asarray(img, dtype=bool)
    h, w = bits.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = bits
    faces = int(bits.sum())
    # a grid vertex is present iff any of its four incident pixels is white
    verts = int((pad[:-1, :-1] | pad[:-1, 1:] | pad[1:, :-1] | pad[1:, 1:]).sum())
    horiz = int((pad[:-1, 1:-1] | pad[1:, 1:-1]).sum())
    vert = int((pad[1:-1, :-1] | pad[1:-1, 1:]).sum())
    return verts - (horiz + vert) + faces
