"""Named feature sets and the feature-table file format.

A feature table is a CSV with an ``image_id`` column followed by named
feature columns, plus a JSON sidecar (``<name>.schema.json``) listing the
feature set, column names and dimension.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .curves import CURVE_LENGTH, GRID, PC_RGB_NAMES, PC_XYZ_NAMES, betti_curves, betti_entropy_curves, pc_rgb, pc_xyz
from .image_io import rgb_channels, rgb_to_xyz
from .persistence import sublevel_persistence
from .stats import PS_RGB_NAMES, PS_XYZ_NAMES, ps_from_diagrams, ps_rgb, ps_xyz

FEATURE_SETS = {
    "ps-rgb": (ps_rgb, PS_RGB_NAMES),
    "ps-xyz": (ps_xyz, PS_XYZ_NAMES),
    "pc-rgb": (pc_rgb, PC_RGB_NAMES),
    "pc-xyz": (pc_xyz, PC_XYZ_NAMES),
}
ALL_ORDER = ("ps-rgb", "ps-xyz", "pc-rgb", "pc-xyz")


def feature_names(feature_set: str) -> list[str]:
    if feature_set == "all":
        return [n for s in ALL_ORDER for n in FEATURE_SETS[s][1]]
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    return list(FEATURE_SETS[feature_set][1])


def extract(img: np.ndarray, feature_set: str = "all") -> np.ndarray:
    if feature_set == "all":
        # six diagram pairs shared by all four sets
        rgb = [sublevel_persistence(ch) for ch in rgb_channels(img)]
        xyz = [sublevel_persistence(ch) for ch in rgb_to_xyz(img)]
        return np.concatenate([ps_from_diagrams(rgb), ps_from_diagrams(xyz), betti_curves(rgb), betti_entropy_curves(*xyz[0])])
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    return FEATURE_SETS[feature_set][0](img)


def schema_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".schema.json")


def write_feature_table(path, image_ids, rows, feature_set: str) -> None:
    names = feature_names(feature_set)
    rows = np.asarray(rows, dtype=np.float64).reshape(len(image_ids), -1)
    if rows.shape[1] != len(names):
        raise ValueError(f"{feature_set} has {len(names)} columns, got {rows.shape[1]}")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", *names])
        for image_id, row in zip(image_ids, rows):
            writer.writerow([image_id, *map(repr, row.tolist())])
    schema = {"feature_set": feature_set, "dimension": len(names), "columns": ["image_id", *names]}
    schema_path(path).write_text(json.dumps(schema, indent=1) + "\n")


def read_feature_table(path) -> tuple[list[str], np.ndarray, list[str]]:
    """Return ``(image_ids, matrix, feature_names)``, checked against the sidecar if present."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids, rows = [], []
        for rec in reader:
            if len(rec) != len(header):
                raise ValueError(f"{path}: row for {rec[0]!r} has {len(rec)} fields, expected {len(header)}")
            ids.append(rec[0])
            rows.append([float(v) for v in rec[1:]])
    if header[0] != "image_id":
        raise ValueError(f"{path}: first column must be image_id")
    sidecar = schema_path(path)
    if sidecar.exists():
        schema = json.loads(sidecar.read_text())
        if schema["columns"] != header:
            raise ValueError(f"{path}: columns do not match {sidecar.name}")
    matrix = np.array(rows, dtype=np.float64).reshape(len(ids), len(header) - 1)
    return ids, matrix, header[1:]


def write_curve(path, values) -> None:
    values = np.asarray(values, dtype=np.float64)
    if len(values) != CURVE_LENGTH:
        raise ValueError(f"curves have {CURVE_LENGTH} samples, got {len(values)}")
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value"])
        for t, v in zip(GRID.tolist(), values.tolist()):
            writer.writerow([t, repr(v)])


def read_curve(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return np.array([float(r["value"]) for r in reader])
