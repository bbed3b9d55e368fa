"""Synthetic labeled datasets and client partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix (m, q), integer labels in [0, class_count)."""

    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labs = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ConfigError(f"features must be a non-empty 2-D matrix, got {feats.shape}")
        if labs.shape != (feats.shape[0],):
            raise ConfigError(f"labels shape {labs.shape} does not match {feats.shape[0]} samples")
        if not np.all(np.isfinite(feats)):
            raise NumericError("features contain NaN or Inf")
        if self.class_count < 2 or labs.min() < 0 or labs.max() >= self.class_count:
            raise ConfigError(f"labels must lie in [0, {self.class_count})")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return self.features.shape[0]


def sample_class_means(class_count: int, input_dim: int, separation: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Class means drawn uniformly on the sphere of radius ``separation``."""
    dirs = rng.standard_normal((class_count, input_dim))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return separation * dirs / norms


def sample_from_means(means: np.ndarray, per_class: int,
                      rng: np.random.Generator) -> LabeledDataset:
    """Unit-covariance Gaussian cluster of ``per_class`` samples around each mean."""
    class_count, q = means.shape
    feats = np.concatenate(
        [means[c] + rng.standard_normal((per_class, q)) for c in range(class_count)]
    )
    labels = np.repeat(np.arange(class_count), per_class)
    return LabeledDataset(features=feats, labels=labels, class_count=class_count)


def generate_synthetic(class_count: int, input_dim: int, samples_per_class: int,
                       class_separation: float, rng: np.random.Generator) -> LabeledDataset:
    """Gaussian class clusters with means on a sphere of radius ``class_separation``."""
    if class_count < 2 or input_dim < 1:
        raise ConfigError("need class_count >= 2 and input_dim >= 1")
    means = sample_class_means(class_count, input_dim, class_separation, rng)
    return sample_from_means(means, samples_per_class, rng)


def make_train_test(class_count: int, input_dim: int, train_per_class: int,
                    test_per_class: int, class_separation: float,
                    rng: np.random.Generator) -> tuple[LabeledDataset, LabeledDataset]:
    """Train and held-out test sets drawn around the same class means."""
    if class_count < 2 or input_dim < 1:
        raise ConfigError("need class_count >= 2 and input_dim >= 1")
    means = sample_class_means(class_count, input_dim, class_separation, rng)
    train = sample_from_means(means, train_per_class, rng)
    test = sample_from_means(means, test_per_class, rng)
    return train, test


def _take(ds: LabeledDataset, idx: np.ndarray) -> LabeledDataset:
    return LabeledDataset(features=ds.features[idx], labels=ds.labels[idx],
                          class_count=ds.class_count)


def partition_iid(ds: LabeledDataset, n: int, rng: np.random.Generator) -> list[LabeledDataset]:
    """Shuffle, then split into contiguous near-equal shards.

    The remainder is handed out one sample per client starting from client 0.
    """
    m = len(ds)
    if m < n:
        raise ConfigError(f"cannot split {m} samples across {n} clients")
    perm = rng.permutation(m)
    sizes = [m // n + (1 if i < m % n else 0) for i in range(n)]
    bounds = np.cumsum([0] + sizes)
    return [_take(ds, perm[bounds[i]:bounds[i + 1]]) for i in range(n)]


def partition_label_skew(ds: LabeledDataset, n: int, alpha: float,
                         rng: np.random.Generator, max_retries: int = 100) -> list[LabeledDataset]:
    """Dirichlet label-skew split: each class is spread over clients according
    to a Dirichlet(alpha, ..., alpha) draw.  Smaller alpha means stronger skew.

    Redraws (up to ``max_retries``) until every client holds at least one
    sample.
    """
    if alpha <= 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    for _ in range(max_retries):
        shard_idx: list[list[int]] = [[] for _ in range(n)]
        for c in range(ds.class_count):
            members = np.flatnonzero(ds.labels == c)
            members = rng.permutation(members)
            props = rng.dirichlet(np.full(n, alpha))
            cuts = np.floor(np.cumsum(props) * len(members) + 0.5).astype(int)
            start = 0
            for i in range(n):
                shard_idx[i].extend(members[start:cuts[i]])
                start = cuts[i]
        if all(len(s) >= 1 for s in shard_idx):
            return [_take(ds, np.array(sorted(s), dtype=int)) for s in shard_idx]
    raise ConfigError(f"label-skew split left a client empty after {max_retries} retries")
