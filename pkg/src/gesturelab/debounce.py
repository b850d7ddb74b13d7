"""Temporal confirmation of classifier output.

Raw per-frame predictions flicker. A fixed-depth queue only reports a
gesture once the same class has been accepted for the full window; anything
under the confidence threshold is recorded as 0 and breaks the run.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Optional


class Debouncer:
    """Sliding window over accepted classes; starts filled with zeros.

    push() accepts the class only when its confidence is strictly above the
    threshold, then reports the window consensus: the common nonzero value
    if all entries agree, else 0.
    """

    def __init__(self, depth: int = 5, threshold: float = 0.95):
        if depth < 1:
            raise ValueError(f"depth must be at least 1, got {depth}")
        if not 0.0 <= threshold <= 1.0:
            raise ValueError(f"threshold must be within [0, 1], got {threshold}")
        self.depth = depth
        self.threshold = threshold
        self._window = deque([0] * depth, maxlen=depth)

    def push(self, num: int, num_prob: Optional[float]) -> int:
        accepted = num if (num_prob is not None and num_prob > self.threshold) else 0
        self._window.append(accepted)
        first = self._window[0]
        if first != 0 and all(v == first for v in self._window):
            return first
        return 0

    def reset(self) -> None:
        self._window = deque([0] * self.depth, maxlen=self.depth)

    @property
    def window(self) -> tuple:
        return tuple(self._window)


def edge_events(stable: Iterable[int]) -> Iterator[tuple[int, int]]:
    """Yield (index, gesture) whenever the consensus switches to a new nonzero value.

    A gesture held across consecutive frames fires once; it can fire again
    after the consensus has dropped away (to 0 or another class) in between.
    """
    prev = 0
    for index, value in enumerate(stable):
        if value != 0 and value != prev:
            yield index, value
        prev = value
