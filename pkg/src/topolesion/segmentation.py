"""Training-free lesion segmentation by life intervals of dark pixels.

Pixels darker than a shrinking fraction of the mean intensity survive longer.
The number of connected components along that shrinking filtration picks a
working threshold, components at that threshold are ranked by a
center-weighted sum of life spans, and the mask is the filled convex hull of
the above-average components.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .cubical import label_components
from .image_io import as_gray, rgb_to_gray

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentationConfig:
    steps: int = 50
    divisor: int = 4
    tiny_fraction: float = 0.001

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("steps must be at least 2")
        if self.divisor < 1:
            raise ValueError("divisor must be at least 1")
        if not 0 <= self.tiny_fraction <= 0.1:
            raise ValueError("tiny_fraction must lie in [0, 0.1]")


@dataclass
class SegmentationResult:
    mask: np.ndarray
    t_prime: int
    component_counts: list[int]
    life_scores: list[float] = field(default_factory=list)
    kept: list[int] = field(default_factory=list)
    warning: str | None = None

    def report(self) -> dict:
        return {
            "t_prime": self.t_prime,
            "component_counts": self.component_counts,
            "life_scores": self.life_scores,
            "kept_components": self.kept,
            "mask_area": int(self.mask.sum()),
            "warning": self.warning,
        }


def life_spans(gray: np.ndarray, cfg: SegmentationConfig = SegmentationConfig()) -> np.ndarray:
    """Last step t in 1..T at which each pixel is still at most ``a*(1 - t/T)``; 0 if never."""
    gray = as_gray(gray)
    a = gray.mean()
    steps = np.arange(1, cfg.steps + 1)
    cutoffs = a * (1 - steps / cfg.steps)
    # cutoffs decrease with t, so membership is a prefix of 1..T
    return (gray[:, :, None] <= cutoffs[None, None, :]).sum(axis=2)


def component_counts(life: np.ndarray, steps: int) -> list[int]:
    return [label_components(life >= t, 8).count for t in range(1, steps + 1)]


def select_threshold(counts, divisor: int = 4) -> int:
    """Working step from the component counts of S_1..S_T (``counts[0]`` is S_1)."""
    counts = list(counts)
    if not counts:
        raise ValueError("no component counts")
    steps = len(counts)
    first_rise = next((t for t in range(1, steps) if counts[t] > counts[t - 1]), steps - 1)
    return int(min(max(1 + first_rise // divisor, 1), max(steps - 1, 1)))


def _distances(h: int, w: int):
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    to_center = np.hypot(xs - (w - 1) / 2, ys - (h - 1) / 2)
    to_edge = np.minimum.reduce([xs, ys, w - 1 - xs, h - 1 - ys])
    return to_center, to_edge


def life_score(component: np.ndarray, life: np.ndarray) -> float:
    """``(1 + d_edge)^3 * sum(L) / (1 + d_center)^3`` for a boolean component mask."""
    component = np.asarray(component, dtype=bool)
    if not component.any():
        raise ValueError("empty component")
    to_center, to_edge = _distances(*component.shape)
    d_o = to_center[component].min()
    d_b = to_edge[component].min()
    return float((1 + d_b) ** 3 * life[component].sum() / (1 + d_o) ** 3)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Hull vertices in counter-clockwise order (monotone chain), collinear points dropped."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def fill_convex_hull(points: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Rasterize the hull of (x, y) points: a pixel is in iff its center is inside or on it."""
    h, w = shape
    out = np.zeros(shape, dtype=bool)
    hull = convex_hull(points)
    if len(hull) == 0:
        return out
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    eps = 1e-9
    inside = (
        (xs >= hull[:, 0].min() - eps)
        & (xs <= hull[:, 0].max() + eps)
        & (ys >= hull[:, 1].min() - eps)
        & (ys <= hull[:, 1].max() + eps)
    )
    if len(hull) == 2:
        (ax, ay), (bx, by) = hull
        inside &= np.abs((bx - ax) * (ys - ay) - (by - ay) * (xs - ax)) <= eps
    elif len(hull) > 2:
        for (ax, ay), (bx, by) in zip(hull, np.roll(hull, -1, axis=0)):
            inside &= (bx - ax) * (ys - ay) - (by - ay) * (xs - ax) >= -eps
    return inside


def run_segmentation(img: np.ndarray, cfg: SegmentationConfig = SegmentationConfig()) -> SegmentationResult:
    """Full pipeline with the intermediate quantities kept for reporting."""
    gray = rgb_to_gray(img) if np.ndim(img) == 3 else as_gray(img)
    h, w = gray.shape
    if np.ptp(gray) == 0:
        log.warning("constant image: returning the full frame as mask")
        return SegmentationResult(
            mask=np.ones((h, w), dtype=bool),
            t_prime=0,
            component_counts=[],
            warning="degenerate image: all pixels identical",
        )
    life = life_spans(gray, cfg)
    counts = component_counts(life, cfg.steps)
    t_prime = select_threshold(counts, cfg.divisor)
    labeling = label_components(life >= t_prime, 8)
    labels = labeling.labels
    areas = np.bincount(labels.ravel(), minlength=labeling.count + 1)
    min_area = cfg.tiny_fraction * h * w
    candidates = [k for k in range(1, labeling.count + 1) if areas[k] >= min_area]
    warning = None
    if not candidates and labeling.count:
        candidates = [int(np.argmax(areas[1:])) + 1]
        warning = "all components below the size cutoff; kept the largest"
    scores = [life_score(labels == k, life) for k in candidates]
    if scores:
        mean = float(np.mean(scores))
        kept = [k for k, s in zip(candidates, scores) if s > mean]
        if not kept:
            # all scores equal
            kept = list(candidates)
    else:
        kept = []
        warning = "no pixel darker than the mean survives to the working step"
    ys, xs = np.nonzero(np.isin(labels, kept))
    mask = fill_convex_hull(np.column_stack([xs, ys]), (h, w))
    return SegmentationResult(
        mask=mask,
        t_prime=t_prime,
        component_counts=counts,
        life_scores=scores,
        kept=[int(k) for k in kept],
        warning=warning,
    )


def segment(img: np.ndarray, cfg: SegmentationConfig = SegmentationConfig()) -> np.ndarray:
    return run_segmentation(img, cfg).mask


def iou(mask: np.ndarray, other: np.ndarray) -> float:
    """Jaccard index; two empty masks count as a perfect match."""
    mask = np.asarray(mask, dtype=bool)
    other = np.asarray(other, dtype=bool)
    if mask.shape != other.shape:
        raise ValueError(f"mask shapes differ: {mask.shape} vs {other.shape}")
    union = np.count_nonzero(mask | other)
    if union == 0:
        return 1.0
    return np.count_nonzero(mask & other) / union
