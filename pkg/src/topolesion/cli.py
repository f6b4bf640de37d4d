"""Command-line pipeline: segment, features, curve, train, eval, selftest.

Exit status is 0 on success, 1 for bad input and 2 when an internal
invariant check fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import fusion, svm
from .cubical import betti, threshold
from .curves import betti_curve, entropy_curve
from .features import extract, feature_names, read_feature_table, write_curve, write_feature_table
from .image_io import ImageError, apply_mask, load_image, load_mask, rgb_channels, rgb_to_gray, rgb_to_xyz, write_pgm
from .persistence import sublevel_persistence
from .segmentation import SegmentationConfig, iou, run_segmentation

log = logging.getLogger("topolesion")

IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".pnm", ".csv"}
EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


class InputError(Exception):
    pass


def _list_images(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def _map(fn, items, jobs):
    # results come back in input order whatever the worker count
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _load_config(args, keys):
    """Config file values overridden by any flag that was given explicitly."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _write_manifest(out_dir: Path, name: str, manifest: dict) -> None:
    missing = [p for p in manifest.get("outputs", []) if not Path(p).exists()]
    if missing:
        raise RuntimeError(f"manifest lists missing outputs: {missing}")
    (out_dir / name).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


# -- segment ----------------------------------------------------------------------


def _segment_one(job):
    path, cfg, reference_dir = job
    try:
        img = load_image(path)
        result = run_segmentation(img, SegmentationConfig(**cfg))
        report = {"image": Path(path).name, **result.report()}
        if reference_dir is not None:
            ref_path = Path(reference_dir) / (Path(path).stem + ".pgm")
            if ref_path.exists():
                report["iou"] = iou(result.mask, load_mask(ref_path))
        return path, result.mask, report, None
    except (ImageError, ValueError) as exc:
        return path, None, None, str(exc)


def cmd_segment(args) -> int:
    cfg = _load_config(args, ["steps", "divisor", "tiny_fraction"])
    seg_cfg = {k: cfg[k] for k in ("steps", "divisor", "tiny_fraction") if k in cfg}
    SegmentationConfig(**seg_cfg)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    images = _list_images(args.input_dir)
    started = time.perf_counter()
    results = _map(_segment_one, [(str(p), seg_cfg, args.reference_dir) for p in images], args.jobs)
    errors, outputs = {}, []
    for path, mask, report, err in results:
        if err is not None:
            errors[Path(path).name] = err
            continue
        stem = Path(path).stem
        write_pgm(out_dir / f"{stem}.pgm", mask)
        (out_dir / f"{stem}.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
        outputs += [str(out_dir / f"{stem}.pgm"), str(out_dir / f"{stem}.json")]
    _write_manifest(
        out_dir,
        "manifest.json",
        {
            "command": "segment",
            "inputs": [str(p) for p in images],
            "config": SegmentationConfig(**seg_cfg).__dict__,
            "seed": args.seed,
            "outputs": outputs,
            "errors": errors,
            "seconds": round(time.perf_counter() - started, 3),
        },
    )
    for name, err in errors.items():
        print(f"error: {name}: {err}", file=sys.stderr)
    return EXIT_INPUT if errors else EXIT_OK


# -- features ---------------------------------------------------------------------


def _features_one(job):
    path, mask_path, feature_set = job
    try:
        img = load_image(path)
        if mask_path is not None:
            img = apply_mask(img, load_mask(mask_path))
        return extract(img, feature_set), None
    except (ImageError, ValueError) as exc:
        return None, str(exc)


def cmd_features(args) -> int:
    cfg = _load_config(args, ["feature_set"])
    feature_set = cfg.get("feature_set", "all")
    feature_names(feature_set)
    images = _list_images(args.input_dir)
    jobs = []
    for p in images:
        mask_path = None
        if args.masks:
            mask_path = Path(args.masks) / f"{p.stem}.pgm"
            if not mask_path.exists():
                raise InputError(f"missing mask for {p.name}: {mask_path}")
        jobs.append((str(p), None if mask_path is None else str(mask_path), feature_set))
    started = time.perf_counter()
    results = _map(_features_one, jobs, args.jobs)
    errors = {p.name: err for p, (_, err) in zip(images, results) if err is not None}
    ids = [p.stem for p, (row, _) in zip(images, results) if row is not None]
    rows = [row for row, _ in results if row is not None]
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_feature_table(out, ids, np.array(rows).reshape(len(ids), -1), feature_set)
    _write_manifest(
        out.parent,
        out.stem + ".manifest.json",
        {
            "command": "features",
            "inputs": [str(p) for p in images],
            "masked": bool(args.masks),
            "feature_set": feature_set,
            "seed": args.seed,
            "outputs": [str(out)],
            "errors": errors,
            "seconds": round(time.perf_counter() - started, 3),
        },
    )
    for name, err in errors.items():
        print(f"error: {name}: {err}", file=sys.stderr)
    return EXIT_INPUT if errors else EXIT_OK


# -- curve ------------------------------------------------------------------------

CHANNELS = {"R": 0, "G": 1, "B": 2, "X": 0, "Y": 1, "Z": 2}


def channel_of(img, name: str) -> np.ndarray:
    if name == "gray":
        return rgb_to_gray(img)
    if name not in CHANNELS:
        raise InputError(f"unknown channel {name!r}; choose from R, G, B, X, Y, Z, gray")
    source = rgb_channels(img) if name in "RGB" else rgb_to_xyz(img)
    return source[CHANNELS[name]]


def cmd_curve(args) -> int:
    img = load_image(args.image)
    p0, p1 = sublevel_persistence(channel_of(img, args.channel))
    curve = {
        "betti0": lambda: betti_curve(p0),
        "betti1": lambda: betti_curve(p1),
        "entropy0": lambda: entropy_curve(p0),
        "entropy1": lambda: entropy_curve(p1),
    }[args.curve]()
    write_curve(args.output, curve)
    return EXIT_OK


# -- train / eval ----------------------------------------------------------------


def _read_labels(path) -> dict[str, str]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"image_id", "label"} <= set(reader.fieldnames):
            raise InputError(f"{path}: expected columns image_id,label")
        return {row["image_id"]: row["label"] for row in reader}


def split_indices(labels: np.ndarray, seed: int, train_fraction=0.7, balanced_test: int | None = None):
    """Seeded train/test split; ``balanced_test`` takes that many of each class for testing."""
    rng = np.random.default_rng(seed)
    if balanced_test:
        test = []
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            if len(idx) <= balanced_test:
                raise InputError(f"class {c!r} has only {len(idx)} samples, cannot hold out {balanced_test}")
            test.extend(rng.choice(idx, balanced_test, replace=False).tolist())
        test = np.sort(np.array(test))
        train = np.setdiff1d(np.arange(len(labels)), test)
        return train, test
    perm = rng.permutation(len(labels))
    cut = int(round(train_fraction * len(labels)))
    return np.sort(perm[:cut]), np.sort(perm[cut:])


def _aligned(args):
    ids, X, names = read_feature_table(args.features)
    labels_by_id = _read_labels(args.labels)
    missing = [i for i in ids if i not in labels_by_id]
    if missing or len(labels_by_id) != len(ids):
        raise InputError(f"labels do not match feature rows (unlabelled: {missing[:5]})")
    return ids, X, names, np.array([labels_by_id[i] for i in ids])


def synthetic_backbone(n: int, dim: int, seed: int) -> np.ndarray:
    """Noise stand-in for backbone network features."""
    return np.random.default_rng(seed + 7919).normal(0, 1, (n, dim))


def cmd_train(args) -> int:
    cfg = _load_config(args, ["seed", "model", "reduced_dim", "balanced_test", "epochs", "learning_rate", "lam"])
    seed = int(cfg.get("seed", 0))
    ids, X, names, labels = _aligned(args)
    classes = np.unique(labels)
    y = np.searchsorted(classes, labels)
    train_idx, test_idx = split_indices(y, seed, balanced_test=cfg.get("balanced_test"))
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics = {"model": cfg.get("model", "svm"), "seed": seed, "n_train": len(train_idx), "n_test": len(test_idx)}
    if metrics["model"] == "svm":
        model = svm.train_ovo(X[train_idx], y[train_idx], lam=cfg.get("lam", 1e-3), epochs=cfg.get("epochs", 50), seed=seed)
        model.meta = {"class_names": classes.tolist(), "feature_names": names}
        pred = model.predict(X[test_idx])
        (out / "model.json").write_text(model.to_json())
    elif metrics["model"] == "fusion":
        backbone = _backbone(args, ids, seed)
        tcfg = fusion.TrainConfig(
            learning_rate=cfg.get("learning_rate", 0.05),
            epochs=cfg.get("epochs", 200),
            seed=seed,
            reduced_dim=cfg.get("reduced_dim", 512),
        )
        trained = fusion.train(backbone[train_idx], X[train_idx], y[train_idx], tcfg)
        pred = trained.predict(backbone[test_idx], X[test_idx])
        trained.write_trace(out / "alpha_trace.csv")
        (out / "model.json").write_text(
            json.dumps(
                {
                    "head": json.loads(trained.head.to_json()),
                    "min": trained.scaler.lo.tolist(),
                    "max": trained.scaler.hi.tolist(),
                    "class_names": classes.tolist(),
                    "config": asdict(tcfg),
                    "backbone": "file" if args.backbone else "synthetic-noise",
                }
            )
        )
        metrics["final_alpha"] = trained.head.alpha
    else:
        raise InputError(f"unknown model {metrics['model']!r}")
    metrics["balanced_accuracy"] = svm.balanced_accuracy(pred, y[test_idx]) if len(test_idx) else None
    metrics["test_ids"] = [ids[i] for i in test_idx]
    (out / "metrics.json").write_text(json.dumps(metrics, indent=1, sort_keys=True) + "\n")
    print(json.dumps({k: v for k, v in metrics.items() if k != "test_ids"}))
    return EXIT_OK


def _backbone(args, ids, seed):
    if args.backbone:
        b_ids, B, _ = read_feature_table(args.backbone)
        index = {i: k for k, i in enumerate(b_ids)}
        if any(i not in index for i in ids):
            raise InputError("backbone table is missing feature rows")
        return B[[index[i] for i in ids]]
    return synthetic_backbone(len(ids), args.backbone_dim, seed)


def cmd_eval(args) -> int:
    ids, X, _ = read_feature_table(args.features)
    raw = json.loads(Path(args.model).read_text())
    if "head" in raw:
        head = fusion.FusionHead.from_json(json.dumps(raw["head"]))
        trained = fusion.TrainedFusion(head, fusion.MinMaxScaler(np.array(raw["min"]), np.array(raw["max"])))
        backbone = _backbone(args, ids, args.seed or 0)
        pred = trained.predict(backbone, X)
        class_names = raw["class_names"]
    else:
        model = svm.OvoModel.from_json(Path(args.model).read_text())
        pred = model.predict(X)
        class_names = model.meta.get("class_names", model.classes.tolist())
    names = [class_names[int(p)] for p in pred]
    result = {"n": len(ids)}
    if args.labels:
        labels = _read_labels(args.labels)
        truth = [labels[i] for i in ids]
        result["balanced_accuracy"] = svm.balanced_accuracy(np.array(names), np.array(truth))
    if args.output:
        with Path(args.output).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["image_id", "prediction"])
            writer.writerows(zip(ids, names))
    print(json.dumps(result))
    return EXIT_OK


# -- selftest ---------------------------------------------------------------------


def fundamental_lemma_violations(img) -> list[tuple[int, int]]:
    """Thresholds ``(t, k)`` where the diagrams disagree with direct Betti counts."""
    diagrams = sublevel_persistence(img)
    bad = []
    for t in range(256):
        counts = betti(threshold(img, t))
        for k in (0, 1):
            if diagrams[k].alive_count(t) != counts[k]:
                bad.append((t, k))
    return bad


def cmd_selftest(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    failures = []
    for i in range(args.images):
        img = (rng.integers(0, 16, (args.size, args.size)) * 17).astype(np.float64)
        bad = fundamental_lemma_violations(img)
        if bad:
            failures.append({"image": i, "violations": bad[:10]})
    report = {"images": args.images, "size": args.size, "seed": args.seed or 0, "failures": failures}
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_INVARIANT if failures else EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topolesion", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--config", help="JSON file of defaults; flags override it")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", parents=[common], help="segment every image in a directory")
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--steps", type=int)
    p.add_argument("--divisor", type=int)
    p.add_argument("--tiny-fraction", dest="tiny_fraction", type=float)
    p.add_argument("--reference-dir", help="directory of reference PGM masks for IOU")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("features", parents=[common], help="extract a feature table")
    p.add_argument("input_dir")
    p.add_argument("--masks", help="directory of PGM masks named like the images")
    p.add_argument("--feature-set", dest="feature_set", choices=["ps-rgb", "ps-xyz", "pc-rgb", "pc-xyz", "all"])
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("curve", parents=[common], help="write one persistence curve as CSV")
    p.add_argument("image")
    p.add_argument("--channel", default="gray")
    p.add_argument("--curve", choices=["betti0", "betti1", "entropy0", "entropy1"], default="betti0")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("train", parents=[common], help="train an SVM or fusion head")
    p.add_argument("features")
    p.add_argument("labels")
    p.add_argument("--model", choices=["svm", "fusion"])
    p.add_argument("-o", "--output-dir", dest="output_dir", required=True)
    p.add_argument("--reduced-dim", dest="reduced_dim", type=int)
    p.add_argument("--balanced-test", dest="balanced_test", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--lam", type=float, help="SVM regularization")
    p.add_argument("--backbone", help="feature table standing in for backbone output")
    p.add_argument("--backbone-dim", dest="backbone_dim", type=int, default=16)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="apply a trained model")
    p.add_argument("model")
    p.add_argument("features")
    p.add_argument("--labels")
    p.add_argument("--backbone")
    p.add_argument("--backbone-dim", dest="backbone_dim", type=int, default=16)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("selftest", parents=[common], help="check diagrams against direct Betti counts")
    p.add_argument("--images", type=int, default=200)
    p.add_argument("--size", type=int, default=12)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, ImageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AssertionError, RuntimeError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
