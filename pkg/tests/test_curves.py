import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from topolesion.cubical import betti, threshold
from topolesion.curves import betti_curve, entropy_curve, pc_rgb, pc_xyz, persistence_curve
from topolesion.image_io import rgb_to_xyz
from topolesion.persistence import PersistenceDiagram, sublevel_persistence

ONE = lambda dgm, b, d, t: np.ones_like(b)  # noqa: E731


def dgm(pts, dim=0):
    return PersistenceDiagram(dim, np.array(pts, dtype=np.float64))


points = st.lists(
    st.tuples(st.integers(0, 254), st.integers(1, 60)).map(lambda t: (t[0], min(t[0] + t[1], 256))),
    max_size=12,
)


def test_persistence_curve_examples():
    assert not persistence_curve(dgm([]), ONE).any()
    c = persistence_curve(dgm([(0, 2)]), ONE)
    assert c[:2].tolist() == [1, 1] and not c[2:].any()
    c = persistence_curve(dgm([(0, 2), (1, 3)]), ONE)
    assert c[:5].tolist() == [1, 2, 1, 0, 0]
    assert len(c) == 255


def test_betti_curve_of_constant_image():
    p0, p1 = sublevel_persistence(np.full((3, 3), 100.0))
    c = betti_curve(p0)
    assert not c[:100].any() and np.all(c[100:] == 1)
    assert not betti_curve(p1).any()
    assert betti_curve(dgm([(0, 2), (1, 3)]))[:4].tolist() == [1, 2, 1, 0]


def test_essential_class_alive_at_last_grid_point():
    assert betti_curve(dgm([(254, math.inf)]))[254] == 1


def test_betti_curve_matches_thresholded_betti(rng):
    for _ in range(10):
        img = rng.integers(0, 256, (8, 8)).astype(np.float64)
        p0, p1 = sublevel_persistence(img)
        c0, c1 = betti_curve(p0), betti_curve(p1)
        for t in range(255):
            assert (c0[t], c1[t]) == betti(threshold(img, t))


def test_entropy_curve_example():
    c = entropy_curve(dgm([(0, 2), (0, 4)]))
    full = -(1 / 3) * math.log(1 / 3) - (2 / 3) * math.log(2 / 3)
    assert c[0] == pytest.approx(0.63651, abs=1e-5)
    assert c[0] == pytest.approx(full) and c[1] == pytest.approx(full)
    assert c[2] == pytest.approx(0.27031, abs=1e-5) and c[3] == pytest.approx(c[2])
    assert not c[4:].any()


def test_entropy_curve_degenerate():
    assert not entropy_curve(dgm([(3, 9)])).any()
    assert not entropy_curve(dgm([])).any()


@given(points)
def test_betti_curve_counts_alive_points(pts):
    d = dgm(pts)
    c = betti_curve(d)
    for t in range(255):
        assert c[t] == sum(1 for b, e in pts if b <= t < e)
    assert np.array_equal(c, persistence_curve(d, ONE))


@given(points)
def test_entropy_terms_bounded(pts):
    d = dgm(pts)
    if not pts:
        return
    life = np.array([e - b for b, e in pts], dtype=np.float64)
    q = life / life.sum()
    terms = -q * np.log(q)
    assert np.all(terms >= 0) and np.all(terms <= 1 / math.e + 1e-12)
    c = entropy_curve(d)
    assert np.all(c >= 0)
    general = persistence_curve(d, lambda D, b, e, t: -((e - b) / life.sum()) * np.log((e - b) / life.sum()))
    assert np.allclose(c, general)


def test_normalized_lifespan_curve_sums_to_one():
    d = dgm([(0, 3), (0, 10), (0, math.inf)])
    total = 3 + 10 + 256
    c = persistence_curve(d, lambda D, b, e, t: (e - b) / total)
    assert c[0] == pytest.approx(1.0)


def test_translation_shifts_curve_support(rng):
    img = rng.integers(0, 100, (6, 6)).astype(np.float64)
    c = 30
    for a, b in zip(sublevel_persistence(img), sublevel_persistence(img + c)):
        ca, cb = betti_curve(a), betti_curve(b)
        assert np.array_equal(ca[: 255 - c], cb[c:])
        assert not cb[:c].any()


def test_pc_rgb_shape_and_blocks():
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    img[:] = (10, 120, 200)
    v = pc_rgb(img)
    assert v.shape == (1530,)
    blocks = v.reshape(6, 255)
    for ch, level in enumerate((10, 120, 200)):
        b0, b1 = blocks[2 * ch], blocks[2 * ch + 1]
        assert not b0[:level].any() and np.all(b0[level:] == 1)
        assert not b1.any()


def test_pc_rgb_channel_permutation(rng):
    img = rng.integers(0, 256, (6, 6, 3)).astype(np.uint8)
    blocks = pc_rgb(img).reshape(3, 510)
    permuted = pc_rgb(img[:, :, [2, 0, 1]]).reshape(3, 510)
    assert np.array_equal(permuted, blocks[[2, 0, 1]])


def test_pc_xyz_shape_and_constant():
    rng = np.random.default_rng(3)
    assert pc_xyz(rng.integers(0, 256, (5, 5, 3)).astype(np.uint8)).shape == (1020,)
    v = pc_xyz(np.full((4, 4, 3), 100, dtype=np.uint8)).reshape(4, 255)
    x_level = math.ceil(100 * (0.4124 + 0.3576 + 0.1805))
    assert not v[0][:x_level].any() and np.all(v[0][x_level:] == 1)
    assert not v[1:].any()


def test_pc_xyz_on_gray_input_tracks_scaled_gray():
    rng = np.random.default_rng(8)
    gray = rng.integers(0, 200, (4, 4)).astype(np.uint8)
    img = np.dstack([gray] * 3)
    x, _, _ = rgb_to_xyz(img)
    assert np.allclose(x, gray * (0.4124 + 0.3576 + 0.1805))
    v = pc_xyz(img).reshape(4, 255)
    # oracle: Betti numbers of the thresholded scaled gray image
    for t in range(255):
        assert (v[0][t], v[1][t]) == betti(threshold(np.ceil(x), t))
