"""Shared test constructions: tiny CSVs, Gaussian blobs, scaled matrices."""

import numpy as np

from flowbench.ingest import FeatureMatrix


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")
    return path


def blobs(n0=100, n1=100, d=4, separation=3.0, informative=None, seed=0, scale01=False):
    """Two Gaussian classes separated along the informative axes."""
    rng = np.random.default_rng(seed)
    informative = list(range(d)) if informative is None else informative
    x0 = rng.normal(0.0, 1.0, size=(n0, d))
    x1 = rng.normal(0.0, 1.0, size=(n1, d))
    for j in informative:
        x1[:, j] += separation
    x = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    order = rng.permutation(n0 + n1)
    x, y = x[order], y[order]
    if scale01:
        lo = x.min(axis=0)
        hi = x.max(axis=0)
        x = (x - lo) / np.where(hi > lo, hi - lo, 1.0)
    return FeatureMatrix(
        values=x, feature_names=[f"f{i}" for i in range(d)], labels=y
    )
