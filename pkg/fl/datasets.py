# fl/datasets.py - Synthetic classification data and its text snapshot format
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from core.errors import InvalidShape
from core.utils import PathLike, format_float, write_text_atomic

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    features: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64
    n_classes: int

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 1 or len(self.features) != len(self.labels):
            raise InvalidShape("features must be (n, d) and labels (n,)")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(self.features[indices], self.labels[indices], self.n_classes)


@dataclass(frozen=True, eq=False)
class ClientDataset:
    """One device's shard"""

    owner: int
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    indices: Optional[np.ndarray] = None  # positions in the pooled dataset

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def class_histogram(self) -> Dict[int, int]:
        counts = np.bincount(self.labels, minlength=self.n_classes)
        return {int(c): int(n) for c, n in enumerate(counts) if n > 0}

    @property
    def classes_present(self) -> int:
        return len(self.class_histogram)

    @property
    def class_coverage(self) -> float:
        """Effective number of classes (exp of label entropy) over n_classes"""
        if len(self.labels) == 0:
            return 0.0
        p = np.bincount(self.labels, minlength=self.n_classes) / len(self.labels)
        p = p[p > 0]
        return float(np.exp(-np.sum(p * np.log(p))) / self.n_classes)


def generate_synthetic_dataset(
    n_classes: int,
    n_samples: int,
    feature_dim: int,
    seed: int,
    separation: float = 4.0,
    noise: float = 1.0,
) -> LabeledDataset:
    """Gaussian blobs, one per class, with balanced class counts.

    When there are no more classes than feature dimensions the class means are
    orthogonal directions scaled by `separation`; otherwise they are random
    unit directions scaled the same way.
    """
    if n_classes < 2 or n_samples < n_classes or feature_dim < 1:
        raise InvalidShape(
            f"need n_classes >= 2, n_samples >= n_classes, feature_dim >= 1 "
            f"(got {n_classes}, {n_samples}, {feature_dim})"
        )
    rng = np.random.default_rng(seed)
    if n_classes <= feature_dim:
        basis, _ = np.linalg.qr(rng.standard_normal((feature_dim, feature_dim)))
        means = basis[:, :n_classes].T * separation
    else:
        directions = rng.standard_normal((n_classes, feature_dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        means = directions * separation

    counts = np.full(n_classes, n_samples // n_classes, dtype=np.int64)
    counts[: n_samples % n_classes] += 1
    labels = np.repeat(np.arange(n_classes, dtype=np.int64), counts)
    labels = labels[rng.permutation(n_samples)]
    features = means[labels] + noise * rng.standard_normal((n_samples, feature_dim))
    logger.debug(f"Generated {n_samples} samples over {n_classes} classes in {feature_dim} dims")
    return LabeledDataset(features, labels, n_classes)


def train_test_split(dataset: LabeledDataset, test_fraction: float, seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    n = len(dataset)
    n_test = min(n - 1, max(1, int(round(n * test_fraction))))
    order = np.random.default_rng(seed).permutation(n)
    return dataset.subset(np.sort(order[n_test:])), dataset.subset(np.sort(order[:n_test]))


def format_samples(features: np.ndarray, labels: np.ndarray) -> str:
    """One sample per line: label, then comma-separated features"""
    lines = []
    for label, row in zip(labels, features):
        lines.append(",".join([str(int(label))] + [format_float(v) for v in row]))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_samples(text: str) -> Tuple[np.ndarray, np.ndarray]:
    labels, rows = [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        try:
            labels.append(int(parts[0]))
            rows.append([float(v) for v in parts[1:]])
        except ValueError as e:
            raise InvalidShape(f"line {lineno}: {e}") from e
    if rows and len({len(r) for r in rows}) != 1:
        raise InvalidShape("rows have different feature counts")
    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(rows[0]) if rows else 0)
    return features, np.asarray(labels, dtype=np.int64)


def save_partition(partition: Mapping[int, ClientDataset], directory: PathLike) -> None:
    """One snapshot file per device, named by device id"""
    directory = Path(directory)
    for owner in sorted(partition):
        shard = partition[owner]
        write_text_atomic(directory / f"device_{owner:05d}.csv", format_samples(shard.features, shard.labels))
    logger.info(f"Saved {len(partition)} device shards to {directory}")


def load_partition(directory: PathLike, n_classes: int) -> Dict[int, ClientDataset]:
    partition = {}
    for path in sorted(Path(directory).glob("device_*.csv")):
        owner = int(path.stem.split("_")[1])
        features, labels = parse_samples(path.read_text(encoding="utf-8"))
        partition[owner] = ClientDataset(owner, features, labels, n_classes)
    return partition
