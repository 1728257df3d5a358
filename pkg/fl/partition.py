# fl/partition.py - IID and Dirichlet splits of a pooled dataset over devices
import logging
from typing import Dict, List

import numpy as np

from core.errors import DegenerateConcentration, TooManyDevices
from fl.datasets import ClientDataset, LabeledDataset

logger = logging.getLogger(__name__)


def _shards(dataset: LabeledDataset, assignment: List[List[int]]) -> Dict[int, ClientDataset]:
    partition = {}
    for owner, idx in enumerate(assignment):
        indices = np.asarray(sorted(idx), dtype=np.int64)
        partition[owner] = ClientDataset(
            owner=owner,
            features=dataset.features[indices],
            labels=dataset.labels[indices],
            n_classes=dataset.n_classes,
            indices=indices,
        )
    return partition


def _class_indices(dataset: LabeledDataset, rng: np.random.Generator) -> List[np.ndarray]:
    by_class = []
    for c in range(dataset.n_classes):
        idx = np.flatnonzero(dataset.labels == c)
        by_class.append(idx[rng.permutation(len(idx))])
    return by_class


def partition_iid(dataset: LabeledDataset, n_devices: int, seed: int) -> Dict[int, ClientDataset]:
    """Deal every class round-robin so each device gets floor or ceil of its share.

    The dealing offset carries over from class to class, which also keeps
    total shard sizes within one sample of each other.
    """
    if n_devices < 1 or n_devices > len(dataset):
        raise TooManyDevices(f"cannot split {len(dataset)} samples over {n_devices} devices")
    rng = np.random.default_rng(seed)
    assignment: List[List[int]] = [[] for _ in range(n_devices)]
    offset = 0
    for idx in _class_indices(dataset, rng):
        for j, sample in enumerate(idx):
            assignment[(offset + j) % n_devices].append(int(sample))
        offset = (offset + len(idx)) % n_devices
    return _shards(dataset, assignment)


def partition_dirichlet(
    dataset: LabeledDataset, n_devices: int, concentration: float, seed: int
) -> Dict[int, ClientDataset]:
    """Per class, split samples over devices by a symmetric Dirichlet draw.

    Rounding uses largest remainders so each class is assigned exactly.
    Devices left empty take one sample from the currently largest device.
    """
    if concentration <= 0:
        raise DegenerateConcentration(f"concentration must be positive, got {concentration}")
    if n_devices < 1 or n_devices > len(dataset):
        raise TooManyDevices(f"cannot split {len(dataset)} samples over {n_devices} devices")
    rng = np.random.default_rng(seed)
    assignment: List[List[int]] = [[] for _ in range(n_devices)]
    for idx in _class_indices(dataset, rng):
        n_c = len(idx)
        proportions = rng.dirichlet(np.full(n_devices, concentration))
        exact = proportions * n_c
        splits = np.floor(exact).astype(np.int64)
        remainder = n_c - int(splits.sum())
        if remainder > 0:
            order = np.argsort(-(exact - splits), kind="stable")
            splits[order[:remainder]] += 1
        start = 0
        for device, take in enumerate(splits):
            assignment[device].extend(int(s) for s in idx[start:start + take])
            start += take

    repaired = 0
    for device in range(n_devices):
        if assignment[device]:
            continue
        donor = max(range(n_devices), key=lambda d: (len(assignment[d]), -d))
        assignment[device].append(assignment[donor].pop())
        repaired += 1
    if repaired:
        logger.warning(f"Dirichlet({concentration}) left {repaired} empty devices; repaired from largest shards")
    return _shards(dataset, assignment)
