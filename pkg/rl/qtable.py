# rl/qtable.py - Sparse lookup table of Q(S, A) with lazy random initialization
import logging
from typing import Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.seeding import label_digest
from core.utils import format_float

logger = logging.getLogger(__name__)


def state_key(state) -> str:
    return state.key() if hasattr(state, "key") else str(state)


def action_key(action) -> str:
    if isinstance(action, tuple):
        return ",".join(str(v) for v in action)
    return str(action)


class QTable:
    """Rows are created on first write; unwritten entries read as their init value.

    With `init_seed` the init value of an entry is uniform in [0, 1), drawn from
    a stream keyed by (seed, scope, state), so it does not depend on the order
    in which states are first seen. Without it every entry starts at
    `init_value`.
    """

    def __init__(
        self,
        actions: Sequence[Hashable],
        scope: str = "shared",
        init_seed: Optional[int] = None,
        init_value: float = 0.0,
    ):
        if not actions:
            raise ValueError("a Q-table needs at least one action")
        self.actions: List[Hashable] = list(actions)
        self.scope = scope
        self.init_seed = init_seed
        self.init_value = float(init_value)
        self._index = {a: i for i, a in enumerate(self.actions)}
        self._rows: Dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._rows) * len(self.actions)

    def _initial_row(self, key: str) -> np.ndarray:
        if self.init_seed is None:
            return np.full(len(self.actions), self.init_value)
        seq = np.random.SeedSequence([int(self.init_seed), label_digest(self.scope), label_digest(key)])
        return np.random.default_rng(seq).random(len(self.actions))

    def row(self, state) -> np.ndarray:
        """Read-only view of Q(state, .)"""
        key = state_key(state)
        values = self._rows.get(key)
        if values is None:
            values = self._initial_row(key)
        view = values.view()
        view.setflags(write=False)
        return view

    def value(self, state, action) -> float:
        return float(self.row(state)[self._index[action]])

    def max_value(self, state) -> float:
        return float(np.max(self.row(state)))

    def best_action(self, state):
        """argmax, ties resolved by action order"""
        return self.actions[int(np.argmax(self.row(state)))]

    def set(self, state, action, value: float) -> None:
        if not np.isfinite(value):
            raise ValueError(f"Q value must be finite, got {value}")
        key = state_key(state)
        if key not in self._rows:
            self._rows[key] = self._initial_row(key)
        self._rows[key][self._index[action]] = value

    def visited_states(self) -> List[str]:
        return sorted(self._rows)

    def snapshot(self) -> Dict[str, float]:
        """max_A Q(S, A) for every visited state"""
        return {key: float(np.max(values)) for key, values in sorted(self._rows.items())}

    def entries(self) -> Iterator[Tuple[str, Hashable, float]]:
        for key in sorted(self._rows):
            for action, value in zip(self.actions, self._rows[key]):
                yield key, action, float(value)

    def to_text(self) -> str:
        """state<TAB>action<TAB>value, one entry per line"""
        lines = [f"{key}\t{action_key(action)}\t{format_float(value)}" for key, action, value in self.entries()]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(
        cls,
        text: str,
        actions: Sequence[Hashable],
        parse_action: Callable[[str], Hashable],
        scope: str = "shared",
        init_seed: Optional[int] = None,
        init_value: float = 0.0,
    ) -> "QTable":
        table = cls(actions, scope=scope, init_seed=init_seed, init_value=init_value)
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                key, action_text, value_text = line.split("\t")
                table.set(key, parse_action(action_text), float(value_text))
            except (ValueError, KeyError) as e:
                raise ValueError(f"line {lineno} of Q-table {scope}: {e}") from e
        return table

    def size_bytes(self) -> int:
        return len(self.to_text().encode("utf-8"))
