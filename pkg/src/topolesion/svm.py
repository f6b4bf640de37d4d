"""Linear one-against-one SVM trained by projected stochastic subgradient descent."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


def minmax_normalize(X, lo=None, hi=None):
    """Scale columns to [0, 1]; returns ``(scaled, lo, hi)``.

    Pass stored ``lo``/``hi`` to transform held-out rows.  Values outside the
    fitted range are not clamped.  Constant columns map to 0.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        raise ValueError("empty feature matrix")
    if lo is None:
        lo, hi = X.min(axis=0), X.max(axis=0)
    lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (X - lo) / safe, 0.0), lo, hi


@dataclass
class BinarySvm:
    w: np.ndarray
    b: float
    lam: float

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w + self.b

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0, 1, -1)


def objective(w, b, lam, X, y) -> float:
    """``lam/2 * (|w|^2 + b^2) + mean hinge``; the bias is regularized like a weight."""
    margins = y * (X @ w + b)
    return float(lam / 2 * (w @ w + b * b) + np.mean(np.maximum(0.0, 1 - margins)))


def train_binary(X, y, lam=1e-3, epochs=50, seed=0) -> BinarySvm:
    """Pegasos on features augmented with a constant 1 for the bias."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.any(y == 1) and np.any(y == -1)):
        raise ValueError("training a binary SVM needs samples of both classes")
    rng = np.random.default_rng(seed)
    Xa = np.hstack([X, np.ones((len(X), 1))])
    theta = np.zeros(Xa.shape[1])
    radius = 1 / np.sqrt(lam)
    step = 0
    for _ in range(epochs):
        for i in rng.permutation(len(X)):
            step += 1
            eta = 1.0 / (lam * step)
            violated = y[i] * (Xa[i] @ theta) < 1
            theta *= 1 - eta * lam
            if violated:
                theta += eta * y[i] * Xa[i]
            norm = np.linalg.norm(theta)
            if norm > radius:
                theta *= radius / norm
    return BinarySvm(w=theta[:-1], b=float(theta[-1]), lam=lam)


@dataclass
class OvoModel:
    classes: np.ndarray
    pairs: list[tuple[int, int]]
    classifiers: list[BinarySvm]
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.classes)

    def _prepare(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.classifiers[0].w):
            raise ValueError(f"expected {len(self.classifiers[0].w)} features, got {X.shape[1]}")
        if self.lo is not None:
            X, _, _ = minmax_normalize(X, self.lo, self.hi)
        return X

    def votes(self, X) -> np.ndarray:
        X = self._prepare(X)
        tally = np.zeros((len(X), self.k), dtype=np.int64)
        for (i, j), clf in zip(self.pairs, self.classifiers):
            winner = np.where(clf.decision(X) >= 0, i, j)
            np.add.at(tally, (np.arange(len(X)), winner), 1)
        return tally

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum: ties go to the smallest class index
        return self.classes[self.votes(X).argmax(axis=1)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "classes": self.classes.tolist(),
                "pairs": [
                    {"pair": [int(i), int(j)], "w": c.w.tolist(), "b": c.b, "lambda": c.lam}
                    for (i, j), c in zip(self.pairs, self.classifiers)
                ],
                "min": None if self.lo is None else self.lo.tolist(),
                "max": None if self.hi is None else self.hi.tolist(),
                "meta": self.meta,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "OvoModel":
        raw = json.loads(text)
        return cls(
            classes=np.array(raw["classes"]),
            pairs=[tuple(p["pair"]) for p in raw["pairs"]],
            classifiers=[BinarySvm(np.array(p["w"], dtype=np.float64), float(p["b"]), float(p["lambda"])) for p in raw["pairs"]],
            lo=None if raw["min"] is None else np.array(raw["min"], dtype=np.float64),
            hi=None if raw["max"] is None else np.array(raw["max"], dtype=np.float64),
            meta=raw.get("meta", {}),
        )


def train_ovo(X, labels, lam=1e-3, epochs=50, seed=0, normalize=True) -> OvoModel:
    """One binary SVM per unordered class pair, on max-min scaled features."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    lo = hi = None
    if normalize:
        X, lo, hi = minmax_normalize(X)
    pairs, classifiers = [], []
    for i, j in combinations(range(len(classes)), 2):
        rows = (labels == classes[i]) | (labels == classes[j])
        y = np.where(labels[rows] == classes[i], 1, -1)
        pairs.append((i, j))
        classifiers.append(train_binary(X[rows], y, lam=lam, epochs=epochs, seed=seed))
    return OvoModel(classes=classes, pairs=pairs, classifiers=classifiers, lo=lo, hi=hi)


def predict_ovo(model: OvoModel, x):
    pred = model.predict(x)
    return pred[0] if np.ndim(x) == 1 else pred


def balanced_accuracy(predictions, labels) -> float:
    """Mean per-class recall over the classes present in ``labels``."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if len(predictions) != len(labels):
        raise ValueError("predictions and labels differ in length")
    if len(labels) == 0:
        raise ValueError("no labels")
    recalls = [np.mean(predictions[labels == c] == c) for c in np.unique(labels)]
    return float(np.mean(recalls))
