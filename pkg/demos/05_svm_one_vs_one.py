"""One-vs-one linear SVMs on seven well-separated classes."""

import numpy as np

from topolesion.svm import balanced_accuracy, train_ovo
from topolesion.synthetic import gaussian_blobs

X, y = gaussian_blobs(k=7, n_per_class=40, seed=0)
rng = np.random.default_rng(0)
perm = rng.permutation(len(y))
train_idx, test_idx = perm[:200], perm[200:]

model = train_ovo(X[train_idx], y[train_idx], lam=1e-3, epochs=50, seed=0)
pred = model.predict(X[test_idx])
print("binary classifiers:", len(model.classifiers))
print("balanced accuracy:", balanced_accuracy(pred, y[test_idx]))
print("votes for the first test row:", model.votes(X[test_idx[:1]])[0])
