"""Weighted fusion of backbone and topological features with a learnable rate.

The head computes::

    h      = relu(W_red @ v_topo + b_red)
    z      = [(1 - alpha) * v_backbone, alpha * h],   alpha = sigmoid(a_raw)
    probs  = softmax(W_cls @ z + b_cls)

and is trained with softmax cross-entropy.  All gradients, including the
one for ``a_raw``, are computed by hand; ``numerical_gradients`` provides the
central-difference check.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PARAM_NAMES = ("a_raw", "W_red", "b_red", "W_cls", "b_cls")


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class FusionHead:
    a_raw: float
    W_red: np.ndarray
    b_red: np.ndarray
    W_cls: np.ndarray
    b_cls: np.ndarray

    @classmethod
    def init(cls, backbone_dim, topo_dim, n_classes, reduced_dim=512, a_raw=0.5, seed=0):
        rng = np.random.default_rng(seed)
        return cls(
            a_raw=float(a_raw),
            W_red=rng.normal(0, np.sqrt(2.0 / topo_dim), (reduced_dim, topo_dim)),
            b_red=np.zeros(reduced_dim),
            W_cls=rng.normal(0, np.sqrt(1.0 / (backbone_dim + reduced_dim)), (n_classes, backbone_dim + reduced_dim)),
            b_cls=np.zeros(n_classes),
        )

    @property
    def alpha(self) -> float:
        return float(sigmoid(self.a_raw))

    @property
    def backbone_dim(self) -> int:
        return self.W_cls.shape[1] - self.W_red.shape[0]

    @property
    def topo_dim(self) -> int:
        return self.W_red.shape[1]

    def params(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "FusionHead":
        return FusionHead(**{k: np.array(v, copy=True) if k != "a_raw" else float(v) for k, v in self.params().items()})

    def to_json(self) -> str:
        out = {}
        for name, value in self.params().items():
            arr = np.asarray(value, dtype=np.float64)
            out[name] = {"shape": list(arr.shape), "values": arr.ravel().tolist()}
        return json.dumps(out)

    @classmethod
    def from_json(cls, text: str) -> "FusionHead":
        raw = json.loads(text)
        vals = {k: np.array(v["values"], dtype=np.float64).reshape(v["shape"]) for k, v in raw.items()}
        vals["a_raw"] = float(vals["a_raw"])
        return cls(**vals)


def fuse(v_backbone, v_topo, a_raw: float) -> np.ndarray:
    alpha = sigmoid(a_raw)
    return np.concatenate([(1 - alpha) * np.asarray(v_backbone), alpha * np.asarray(v_topo)], axis=-1)


def reduce(v_topo, W_red, b_red) -> np.ndarray:
    v_topo = np.asarray(v_topo, dtype=np.float64)
    if v_topo.shape[-1] != W_red.shape[1]:
        raise ValueError(f"topological features have {v_topo.shape[-1]} entries, expected {W_red.shape[1]}")
    return np.maximum(v_topo @ W_red.T + b_red, 0.0)


def _check(head: FusionHead, v_backbone, v_topo):
    v_backbone = np.atleast_2d(np.asarray(v_backbone, dtype=np.float64))
    v_topo = np.atleast_2d(np.asarray(v_topo, dtype=np.float64))
    if v_backbone.shape[1] != head.backbone_dim:
        raise ValueError(f"backbone features have {v_backbone.shape[1]} entries, expected {head.backbone_dim}")
    if v_backbone.shape[0] != v_topo.shape[0]:
        raise ValueError("backbone and topological batches differ in size")
    return v_backbone, v_topo


def forward(head: FusionHead, v_backbone, v_topo) -> np.ndarray:
    """Class probabilities; a single sample gives a 1-D result."""
    single = np.ndim(v_backbone) == 1
    vb, vt = _check(head, v_backbone, v_topo)
    z = fuse(vb, reduce(vt, head.W_red, head.b_red), head.a_raw)
    probs = softmax(z @ head.W_cls.T + head.b_cls)
    return probs[0] if single else probs


def loss(head: FusionHead, v_backbone, v_topo, labels) -> float:
    probs = np.atleast_2d(forward(head, v_backbone, v_topo))
    labels = np.asarray(labels)
    return float(-np.mean(np.log(probs[np.arange(len(labels)), labels] + 1e-300)))


def backward(head: FusionHead, v_backbone, v_topo, labels) -> tuple[float, dict]:
    """Mean cross-entropy over the batch and its gradient for every parameter."""
    vb, vt = _check(head, v_backbone, v_topo)
    labels = np.asarray(labels)
    n = len(labels)
    alpha = head.alpha
    pre = vt @ head.W_red.T + head.b_red
    h = np.maximum(pre, 0.0)
    z = np.concatenate([(1 - alpha) * vb, alpha * h], axis=1)
    probs = softmax(z @ head.W_cls.T + head.b_cls)
    ce = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))

    d_logits = probs.copy()
    d_logits[np.arange(n), labels] -= 1.0
    d_logits /= n
    d_z = d_logits @ head.W_cls
    nb = vb.shape[1]
    d_zb, d_zh = d_z[:, :nb], d_z[:, nb:]
    # alpha appears in both halves of z: -v_backbone on one side, +h on the other
    d_alpha = np.sum(d_zh * h) - np.sum(d_zb * vb)
    d_pre = alpha * d_zh * (pre > 0)
    grads = {
        "a_raw": float(d_alpha * alpha * (1 - alpha)),
        "W_red": d_pre.T @ vt,
        "b_red": d_pre.sum(axis=0),
        "W_cls": d_logits.T @ z,
        "b_cls": d_logits.sum(axis=0),
    }
    return ce, grads


def numerical_gradients(head: FusionHead, v_backbone, v_topo, labels, step=1e-5) -> dict:
    """Central finite differences of the mean cross-entropy."""
    grads = {}
    for name in PARAM_NAMES:
        if name == "a_raw":
            plus, minus = head.copy(), head.copy()
            plus.a_raw += step
            minus.a_raw -= step
            grads[name] = (loss(plus, v_backbone, v_topo, labels) - loss(minus, v_backbone, v_topo, labels)) / (2 * step)
            continue
        base = getattr(head, name)
        g = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            probe = head.copy()
            arr = getattr(probe, name)
            arr[idx] = base[idx] + step
            up = loss(probe, v_backbone, v_topo, labels)
            arr[idx] = base[idx] - step
            down = loss(probe, v_backbone, v_topo, labels)
            g[idx] = (up - down) / (2 * step)
        grads[name] = g
    return grads


def relative_error(a, b) -> float:
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return float(np.linalg.norm(a - b) / scale) if scale > 1e-12 else 0.0


# -- training -----------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    reduced_dim: int = 512
    momentum: float = 0.9

    def __post_init__(self):
        if self.learning_rate < 0 or self.epochs < 1 or self.batch_size < 1 or self.reduced_dim < 1:
            raise ValueError("training configuration values must be positive")


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    accuracy: float
    alpha: float


@dataclass
class MinMaxScaler:
    """Column-wise max-min scaling fitted on training data."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, X) -> "MinMaxScaler":
        X = np.asarray(X, dtype=np.float64)
        return cls(X.min(axis=0), X.max(axis=0))

    def transform(self, X) -> np.ndarray:
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (np.asarray(X, dtype=np.float64) - self.lo) / safe, 0.0)


@dataclass
class TrainedFusion:
    head: FusionHead
    scaler: MinMaxScaler
    trace: list[EpochRecord] = field(default_factory=list)

    def predict(self, v_backbone, v_topo) -> np.ndarray:
        probs = np.atleast_2d(forward(self.head, v_backbone, self.scaler.transform(np.atleast_2d(v_topo))))
        return probs.argmax(axis=1)

    def write_trace(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["epoch", "loss", "accuracy", "alpha"])
            for r in self.trace:
                writer.writerow([r.epoch, repr(r.loss), repr(r.accuracy), repr(r.alpha)])


def train(v_backbone, v_topo, labels, cfg: TrainConfig = TrainConfig(), head: FusionHead | None = None) -> TrainedFusion:
    """Mini-batch SGD with momentum; topological inputs are max-min scaled first."""
    vb = np.atleast_2d(np.asarray(v_backbone, dtype=np.float64))
    vt_raw = np.atleast_2d(np.asarray(v_topo, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise ValueError("empty training set")
    scaler = MinMaxScaler.fit(vt_raw)
    vt = scaler.transform(vt_raw)
    n_classes = int(labels.max()) + 1
    if head is None:
        head = FusionHead.init(vb.shape[1], vt.shape[1], n_classes, cfg.reduced_dim, seed=cfg.seed)
    else:
        head = head.copy()
    rng = np.random.default_rng(cfg.seed)
    velocity = {k: np.zeros_like(np.asarray(v, dtype=np.float64)) for k, v in head.params().items()}
    trace = []
    n = len(labels)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, grads = backward(head, vb[idx], vt[idx], labels[idx])
            for name in PARAM_NAMES:
                velocity[name] = cfg.momentum * velocity[name] - cfg.learning_rate * np.asarray(grads[name])
                if name == "a_raw":
                    head.a_raw = float(head.a_raw + velocity[name])
                else:
                    getattr(head, name)[...] += velocity[name]
        probs = forward(head, vb, vt)
        trace.append(
            EpochRecord(
                epoch=epoch,
                loss=float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300))),
                accuracy=float(np.mean(probs.argmax(axis=1) == labels)),
                alpha=head.alpha,
            )
        )
    return TrainedFusion(head=head, scaler=scaler, trace=trace)


def synthetic_task(n_per_class=100, backbone_dim=16, topo_dim=24, informative="topo", separation=5.0, seed=0):
    """Two-class Gaussian features where only one half carries the label.

    Stands in for backbone network output, which this package does not compute.
    """
    rng = np.random.default_rng(seed)
    labels = np.repeat([0, 1], n_per_class)
    vb = rng.normal(0, 1, (2 * n_per_class, backbone_dim))
    vt = rng.normal(0, 1, (2 * n_per_class, topo_dim))
    shift = np.where(labels[:, None] == 1, separation / 2, -separation / 2)
    if informative == "topo":
        direction = rng.normal(0, 1, topo_dim)
        vt += shift * direction / np.linalg.norm(direction)
    elif informative == "backbone":
        direction = rng.normal(0, 1, backbone_dim)
        vb += shift * direction / np.linalg.norm(direction)
    else:
        raise ValueError("informative must be 'topo' or 'backbone'")
    perm = rng.permutation(2 * n_per_class)
    return vb[perm], vt[perm], labels[perm]
