"""Exit criteria for the package, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``-s`` or in
the summary) before asserting.
"""

import json
import time

import numpy as np
import pytest

from topolesion.cli import fundamental_lemma_violations, main
from topolesion.cubical import betti
from topolesion.features import extract
from topolesion.fusion import (
    FusionHead,
    TrainConfig,
    backward,
    numerical_gradients,
    relative_error,
    sigmoid,
    synthetic_task,
    train,
)
from topolesion.image_io import write_ppm
from topolesion.persistence import bottleneck_distance, sublevel_persistence
from topolesion.segmentation import iou, segment
from topolesion.svm import balanced_accuracy, train_ovo
from topolesion.synthetic import disk_image, gaussian_blobs, lesion_image, smooth_random_image


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return emit


def test_1_fundamental_lemma(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    failures = 0
    for _ in range(200):
        img = (rng.integers(0, 16, (12, 12)) * 17).astype(np.float64)
        failures += len(fundamental_lemma_violations(img))
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 10
    report(1, ok, f"200 images x 256 thresholds x 2 dims, {failures} mismatches, {elapsed:.2f}s (< 10s)")
    assert failures == 0
    assert elapsed < 10


def test_2_rings_fixture(report, rings):
    plain = betti(rings)
    framed = betti(np.pad(rings, 1, constant_values=True))
    ok = plain == (4, 2) and framed == (5, 3)
    report(2, ok, f"betti {plain} (want (4, 2)), framed {framed} (want (5, 3))")
    assert plain == (4, 2)
    assert framed == (5, 3)


def test_3_stability(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    violations = 0
    for _ in range(50):
        img = smooth_random_image(rng)
        for eps in (1, 2):
            other = np.clip(img + rng.integers(-eps, eps + 1, img.shape), 0, 255)
            assert np.max(np.abs(other - img)) <= eps
            for a, b in zip(sublevel_persistence(img), sublevel_persistence(other)):
                d = bottleneck_distance(a, b)
                worst = max(worst, d / eps)
                violations += d > eps
    report(3, violations == 0, f"100 image pairs, worst distance/eps = {worst:.3f} (<= 1)")
    assert violations == 0


def test_4_feature_dimensions(report):
    img = lesion_image(0, size=20)[0]
    dims = {name: extract(img, name).shape for name in ("ps-rgb", "ps-xyz", "pc-rgb", "pc-xyz", "all")}
    want = {"ps-rgb": (114,), "ps-xyz": (114,), "pc-rgb": (1530,), "pc-xyz": (1020,), "all": (2778,)}
    report(4, dims == want, ", ".join(f"{k}={v[0]}" for k, v in dims.items()))
    assert dims == want


def test_5_fusion_gradients(report):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        head = FusionHead.init(4, 6, 3, reduced_dim=5, a_raw=rng.normal(), seed=seed)
        head.b_red[:] = rng.normal(0, 0.5, 5)
        head.b_cls[:] = rng.normal(0, 0.5, 3)
        vb, vt, y = rng.normal(size=(5, 4)), rng.normal(size=(5, 6)), rng.integers(0, 3, 5)
        _, analytic = backward(head, vb, vt, y)
        numeric = numerical_gradients(head, vb, vt, y, step=1e-5)
        worst = max(worst, *(relative_error(analytic[k], numeric[k]) for k in analytic))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 5
    report(5, ok, f"20 instances, worst relative error {worst:.2e} (<= 1e-4), {elapsed:.2f}s (< 5s)")
    assert worst <= 1e-4
    assert elapsed < 5


def _fit(informative, seed):
    vb, vt, y = synthetic_task(150, informative=informative, seed=seed)
    cut = 210
    trained = train(vb[:cut], vt[:cut], y[:cut], TrainConfig(learning_rate=0.05, epochs=200, reduced_dim=16, seed=seed))
    acc = float(np.mean(trained.predict(vb[cut:], vt[cut:]) == y[cut:]))
    return acc, trained.trace


def test_6_fusion_learning(report):
    topo_acc, topo_trace = _fit("topo", 11)
    back_acc, back_trace = _fit("backbone", 11)
    init_alpha = sigmoid(0.5)
    final_alpha = topo_trace[-1].alpha
    ok = topo_acc >= 0.95 and final_alpha > init_alpha and back_acc >= 0.95
    report(
        6,
        ok,
        f"topo-informative acc {topo_acc:.3f}, alpha {init_alpha:.3f} -> {final_alpha:.3f}; "
        f"backbone-informative acc {back_acc:.3f} (alpha -> {back_trace[-1].alpha:.3f})",
    )
    assert len(topo_trace) <= 200
    assert topo_acc >= 0.95
    assert final_alpha > init_alpha
    assert back_acc >= 0.95


def test_7_segmentation(report):
    scores = [iou(segment(img), truth) for img, truth in (lesion_image(seed) for seed in range(10))]
    passing = sum(s >= 0.8 for s in scores)
    disk, truth = disk_image()
    disk_iou = iou(segment(disk), truth)
    ok = passing >= 9 and disk_iou >= 0.95
    report(7, ok, f"ellipse IOUs {np.round(scores, 3).tolist()}, {passing}/10 >= 0.8; clean disk {disk_iou:.3f}")
    assert passing >= 9
    assert disk_iou >= 0.95


def test_8_svm(report):
    X, y = gaussian_blobs(k=3, n_per_class=60, seed=0)
    perm = np.random.default_rng(0).permutation(len(y))
    cut = int(0.7 * len(y))
    model = train_ovo(X[perm[:cut]], y[perm[:cut]])
    bacc = balanced_accuracy(model.predict(X[perm[cut:]]), y[perm[cut:]])
    X7, y7 = gaussian_blobs(k=7, n_per_class=20, seed=1)
    n_clf = len(train_ovo(X7, y7, epochs=5).classifiers)
    ok = bacc >= 0.95 and n_clf == 21
    report(8, ok, f"3-class balanced accuracy {bacc:.3f} (>= 0.95); 7 classes -> {n_clf} classifiers")
    assert bacc >= 0.95
    assert n_clf == 21


def _batch(root, images):
    masks, feats = root / "masks", root / "all.csv"
    assert main(["segment", str(images), str(masks), "--seed", "3", "--jobs", "1"]) == 0
    assert main(["features", str(images), "--masks", str(masks), "--feature-set", "all", "-o", str(feats), "--jobs", "1"]) == 0
    outputs = {p.name: p.read_bytes() for p in sorted(masks.glob("*.pgm"))}
    outputs.update({p.name: p.read_bytes() for p in sorted(masks.glob("img*.json"))})
    outputs["all.csv"] = feats.read_bytes()
    outputs["all.schema.json"] = (root / "all.schema.json").read_bytes()
    return outputs


def test_9_determinism(report, tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"self{k}.json"
        assert main(["selftest", "--images", "20", "--seed", "5", "-o", str(out)]) == 0
        runs.append(out.read_bytes())
    selftest_same = runs[0] == runs[1]
    images = tmp_path / "images"
    images.mkdir()
    for seed in range(3):
        write_ppm(images / f"img{seed}.ppm", lesion_image(seed, size=32)[0])
    a = _batch(tmp_path / "a", images)
    b = _batch(tmp_path / "b", images)
    batch_same = a == b and len(a) == 8
    assert json.loads(runs[0])["failures"] == []
    report(9, selftest_same and batch_same, f"selftest identical: {selftest_same}; segment+features ({len(a)} files) identical: {batch_same}")
    assert selftest_same
    assert batch_same
