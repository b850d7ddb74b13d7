"""Background-difference motion watch.

The model averages the first `warmup` frames into a fixed background, then
counts pixels whose absolute difference from that background exceeds tau.
A frame raises an alert when the changed-pixel count exceeds rho times the
frame area. There is no background adaptation after warmup; the watch is
meant for a fixed camera over short sessions, where a drifting average
would swallow slow intrusions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..imaging import Frame


@dataclass(frozen=True)
class MotionReport:
    changed: int
    limit: float
    alert: bool


class BackgroundModel:
    def __init__(self, warmup: int = 30, tau: float = 25.0, rho: float = 0.005):
        if warmup < 1:
            raise ValueError(f"warmup must be at least 1 frame, got {warmup}")
        if tau < 0 or not 0 <= rho <= 1:
            raise ValueError("tau must be >= 0 and rho within [0, 1]")
        self.warmup = warmup
        self.tau = tau
        self.rho = rho
        self._seen = 0
        self._accumulator: Optional[np.ndarray] = None
        self._background: Optional[np.ndarray] = None

    @property
    def ready(self) -> bool:
        return self._background is not None

    @staticmethod
    def _gray(frame: Frame) -> np.ndarray:
        if frame.channels == 1:
            return frame.pixels.astype(np.float64)
        return frame.pixels.astype(np.float64).mean(axis=2)

    def feed(self, frame: Frame) -> Optional[MotionReport]:
        """Absorb a frame; returns a report once the background is frozen."""
        gray = self._gray(frame)
        if self._background is None:
            if self._accumulator is None:
                self._accumulator = np.zeros_like(gray)
            elif self._accumulator.shape != gray.shape:
                raise ValueError(
                    f"frame shape {gray.shape} breaks stream shape {self._accumulator.shape}")
            self._accumulator += gray
            self._seen += 1
            if self._seen == self.warmup:
                self._background = self._accumulator / self.warmup
            return None
        if gray.shape != self._background.shape:
            raise ValueError(
                f"frame shape {gray.shape} breaks stream shape {self._background.shape}")
        changed = int((np.abs(gray - self._background) > self.tau).sum())
        limit = self.rho * gray.size
        return MotionReport(changed=changed, limit=limit, alert=changed > limit)
