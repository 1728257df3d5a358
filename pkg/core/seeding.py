# core/seeding.py - Labeled seed streams derived from one master seed
import hashlib
from typing import Dict

import numpy as np

# Labels used across the simulator
DATA = "data"
PARTITION = "partition"
SELECT = "select"
NET = "net"
INTF = "intf"
QINIT = "qinit"
POLICY = "policy"
SHUFFLE = "shuffle"
MODEL = "model"

_label_cache: Dict[str, int] = {}


def label_digest(label: str) -> int:
    """Stable 64-bit integer for a stream label"""
    if label not in _label_cache:
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        _label_cache[label] = int.from_bytes(digest[:8], "little")
    return _label_cache[label]


class SeedStreams:
    """Hands out independent generators keyed by (label, *keys).

    The same (master, label, keys) always yields the same stream, so callers
    can draw per round or per device in any order.
    """

    def __init__(self, master_seed: int):
        if master_seed < 0:
            raise ValueError("master seed must be non-negative")
        self.master_seed = int(master_seed)

    def sequence(self, label: str, *keys: int) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.master_seed, label_digest(label), *[int(k) for k in keys]])

    def generator(self, label: str, *keys: int) -> np.random.Generator:
        return np.random.default_rng(self.sequence(label, *keys))

    def seed(self, label: str, *keys: int) -> int:
        """Plain integer seed for APIs that take one"""
        return int(self.sequence(label, *keys).generate_state(1, dtype=np.uint32)[0])
