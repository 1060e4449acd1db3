"""Dataset handling: feature/label files, fold splits, noise, synthetic data.

Wire formats (all little-endian):

* features ``EAMF``: magic, version byte, n as uint32, count as uint64,
  then count*n float32 values row-major.
* labels ``EAML``: magic, version byte, count as uint64, then count uint16
  class ids.  Predicted-label files reuse the format; 0xFFFF marks a
  rejected cue.

Splits follow the 70/20/10 convention: the item order is shuffled once per
seed into ten chunks; the test set is the chunk at the fold index, the
remembered set the next two chunks cyclically, and the training set the
remaining seven (internally tagged 80/20 fit/validation).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .fileio import atomic_write, atomic_write_text

FEATURES_MAGIC = b"EAMF"
LABELS_MAGIC = b"EAML"
VERSION = 1
_F_HEADER = struct.Struct("<4sBIQ")
_L_HEADER = struct.Struct("<4sBQ")

FOLD_COUNT = 10


@dataclass
class FeatureDataset:
    """A count*n feature matrix with class labels and stable item ids."""

    features: np.ndarray
    labels: np.ndarray | None = None
    ids: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float32)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (len(self.features),):
                raise ValueError(
                    f"label count {self.labels.shape} != feature rows "
                    f"{len(self.features)}")
        if self.ids is None:
            self.ids = np.arange(len(self.features), dtype=np.int64)
        else:
            self.ids = np.asarray(self.ids, dtype=np.int64)
            if self.ids.shape != (len(self.features),):
                raise ValueError("id count != feature rows")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "FeatureDataset":
        idx = np.asarray(indices)
        return FeatureDataset(
            self.features[idx],
            None if self.labels is None else self.labels[idx],
            self.ids[idx],
        )


@dataclass
class FoldSplit:
    """Disjoint index sets partitioning a dataset for one fold."""

    fold_index: int
    training: np.ndarray
    remembered: np.ndarray
    test: np.ndarray
    training_fit: np.ndarray   # 80% of training, for fitting models
    training_val: np.ndarray   # remaining 20%, for validation


def _fold_order(count: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return rng.permutation(count)


def split_folds(dataset, fold_index: int, seed: int) -> FoldSplit:
    """Deterministic 70/20/10 split for one of the ten folds.

    ``dataset`` may be a FeatureDataset or a plain item count.  The shuffle
    depends only on the seed, so across the ten fold indices every item
    lands in the test set exactly once.
    """
    count = dataset if isinstance(dataset, int) else len(dataset)
    if count < FOLD_COUNT:
        raise ValueError(f"need at least {FOLD_COUNT} items, got {count}")
    if not 0 <= fold_index < FOLD_COUNT:
        raise ValueError(f"fold index must be in [0, {FOLD_COUNT - 1}], "
                         f"got {fold_index}")
    order = _fold_order(count, seed)
    # integer half-up boundaries so other languages derive identical chunks
    bounds = [(k * count + 5) // FOLD_COUNT for k in range(FOLD_COUNT + 1)]
    chunks = [order[bounds[k]:bounds[k + 1]] for k in range(FOLD_COUNT)]

    test = chunks[fold_index]
    remembered = np.concatenate([chunks[(fold_index + 1) % FOLD_COUNT],
                                 chunks[(fold_index + 2) % FOLD_COUNT]])
    training = np.concatenate(
        [chunks[(fold_index + k) % FOLD_COUNT] for k in range(3, FOLD_COUNT)])
    fit_count = (8 * len(training) + 5) // 10
    return FoldSplit(fold_index, training, remembered, test,
                     training[:fit_count], training[fit_count:])


def write_split_manifest(count: int, seed: int, path) -> str:
    """Export the shuffled item order so other tools derive the same folds.

    Chunk k of the ten is ``order[(k*count+5)//10 : ((k+1)*count+5)//10]``;
    the fold layout on top of the chunks matches :func:`split_folds`.
    """
    if count < FOLD_COUNT:
        raise ValueError(f"need at least {FOLD_COUNT} items, got {count}")
    manifest = {
        "format": "weam-split",
        "version": 1,
        "seed": seed,
        "count": count,
        "order": [int(i) for i in _fold_order(count, seed)],
    }
    atomic_write_text(path, json.dumps(manifest) + "\n")
    return str(path)


def read_split_manifest(path) -> dict:
    with open(path) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "weam-split":
        raise ValueError("not a split manifest")
    if len(manifest["order"]) != manifest["count"]:
        raise ValueError("split manifest order length != count")
    return manifest


def add_feature_noise(features, level: float, seed: int,
                      ranges=None) -> np.ndarray:
    """Gaussian perturbation with std = level * per-feature range.

    ``ranges`` defaults to the column ranges of the input matrix; pass the
    calibrated spans of a quantizer to keep the noise scale tied to the
    remembered corpus.
    """
    if not (np.isfinite(level) and level >= 0):
        raise ValueError(f"noise level must be finite and >= 0, got {level}")
    x = np.asarray(features, dtype=np.float32)
    if level == 0:
        return x.copy()
    if ranges is None:
        ranges = x.max(axis=0) - x.min(axis=0)
    ranges = np.asarray(ranges, dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    noise = rng.normal(0.0, 1.0, x.shape) * (level * ranges)
    return (x + noise).astype(np.float32)


# -- wire formats ------------------------------------------------------


def write_features(dataset: FeatureDataset, features_path,
                   labels_path=None) -> int:
    """Write the EAMF file (and the EAML file when a path is given)."""
    if not np.isfinite(dataset.features).all():
        raise ValueError("refusing to write non-finite features")
    header = _F_HEADER.pack(FEATURES_MAGIC, VERSION, dataset.n, len(dataset))
    written = atomic_write(
        features_path, header + dataset.features.astype("<f4").tobytes())
    if labels_path is not None:
        if dataset.labels is None:
            raise ValueError("dataset has no labels to write")
        written += write_labels(dataset.labels, labels_path)
    return written


def write_labels(labels, path) -> int:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError("labels must be 1-d")
    if arr.size and (arr.min() < 0 or arr.max() > 0xFFFF):
        raise ValueError("labels must fit in uint16")
    header = _L_HEADER.pack(LABELS_MAGIC, VERSION, arr.size)
    return atomic_write(path, header + arr.astype("<u2").tobytes())


def read_features(features_path, labels_path=None) -> FeatureDataset:
    with open(features_path, "rb") as fh:
        data = fh.read()
    if len(data) < _F_HEADER.size:
        raise ValueError("truncated feature file: header incomplete")
    magic, version, n, count = _F_HEADER.unpack_from(data)
    if magic != FEATURES_MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {FEATURES_MAGIC!r}")
    if version != VERSION:
        raise ValueError(f"unsupported feature file version {version}")
    expected = _F_HEADER.size + 4 * n * count
    if len(data) != expected:
        raise ValueError(f"feature payload is {len(data) - _F_HEADER.size} "
                         f"bytes, expected {4 * n * count}")
    features = np.frombuffer(data, dtype="<f4", offset=_F_HEADER.size)
    features = features.reshape(count, n).copy()
    if not np.isfinite(features).all():
        raise ValueError("feature file contains non-finite values")
    labels = None
    if labels_path is not None:
        labels = read_labels(labels_path)
        if len(labels) != count:
            raise ValueError(f"label count {len(labels)} != feature rows {count}")
    return FeatureDataset(features, labels)


def read_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _L_HEADER.size:
        raise ValueError("truncated label file: header incomplete")
    magic, version, count = _L_HEADER.unpack_from(data)
    if magic != LABELS_MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {LABELS_MAGIC!r}")
    if version != VERSION:
        raise ValueError(f"unsupported label file version {version}")
    if len(data) != _L_HEADER.size + 2 * count:
        raise ValueError("label payload size mismatch")
    return np.frombuffer(data, dtype="<u2", offset=_L_HEADER.size).copy()


# -- bundled synthetic benchmark ---------------------------------------


def make_synthetic(classes: int = 10, per_class: int = 200, n: int = 64,
                   separation: float = 6.0, seed: int = 42) -> FeatureDataset:
    """Gaussian class clusters with unit within-class std.

    Random centroids are rescaled so the closest pair sits exactly
    ``separation`` standard deviations apart, keeping the classes as
    separable as the parameter says regardless of the feature width.
    """
    if classes < 1 or per_class < 1 or n < 1:
        raise ValueError("classes, per_class and n must be positive")
    if separation < 0:
        raise ValueError("separation must be >= 0")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    centroids = rng.normal(0.0, 1.0, (classes, n))
    if classes > 1:
        diffs = centroids[:, None, :] - centroids[None, :, :]
        dists = np.sqrt((diffs ** 2).sum(axis=2))
        closest = dists[np.triu_indices(classes, k=1)].min()
        centroids *= separation / closest
    features = np.repeat(centroids, per_class, axis=0) \
        + rng.normal(0.0, 1.0, (classes * per_class, n))
    labels = np.repeat(np.arange(classes, dtype=np.uint16), per_class)
    order = rng.permutation(classes * per_class)
    return FeatureDataset(features[order].astype(np.float32), labels[order])
