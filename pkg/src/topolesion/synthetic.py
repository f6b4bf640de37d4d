"""Seeded synthetic inputs for demos and tests."""

from __future__ import annotations

import numpy as np


def disk_image(size=64, radius=12, inside=40, outside=200):
    """Gray RGB image of a dark disk at the grid center, and its true mask."""
    ys, xs = np.mgrid[0:size, 0:size]
    c = (size - 1) / 2
    mask = (xs - c) ** 2 + (ys - c) ** 2 <= radius**2
    gray = np.where(mask, inside, outside).astype(np.uint8)
    return np.dstack([gray] * 3), mask


def lesion_image(seed, size=64, noise=25.0):
    """Dark, slightly colored ellipse near the center on noisy skin-like background."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    cx, cy = size / 2 + rng.uniform(-5, 5, 2)
    a, b = rng.uniform(0.15, 0.28, 2) * size
    theta = rng.uniform(0, np.pi)
    u = (xs - cx) * np.cos(theta) + (ys - cy) * np.sin(theta)
    v = -(xs - cx) * np.sin(theta) + (ys - cy) * np.cos(theta)
    mask = (u / a) ** 2 + (v / b) ** 2 <= 1
    skin = np.array([215.0, 175.0, 160.0])
    lesion = np.array([110.0, 70.0, 55.0]) + rng.uniform(-15, 15, 3)
    img = np.where(mask[:, :, None], lesion, skin) + rng.normal(0, noise, (size, size, 3))
    return np.clip(np.round(img), 0, 255).astype(np.uint8), mask


def smooth_random_image(rng, size=8, coarse=4, levels=16):
    """Random image with few critical points: coarse noise, bilinear upsampling, quantization."""
    from scipy.ndimage import zoom

    base = rng.uniform(0, 255, (coarse, coarse))
    img = np.clip(zoom(base, size / coarse, order=1), 0, 255)
    step = 255 / (levels - 1)
    return np.round(np.round(img / step) * step)


def gaussian_blobs(k=3, n_per_class=60, dim=5, spread=1.0, seed=0):
    """Well-separated isotropic Gaussian clusters; labels 0..k-1."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-10, 10, (k, dim))
    X = np.vstack([rng.normal(c, spread, (n_per_class, dim)) for c in centers])
    y = np.repeat(np.arange(k), n_per_class)
    return X, y
