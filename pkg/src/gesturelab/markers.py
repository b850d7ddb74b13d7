"""Color-marker detection, cursor mapping, and pointer action rules.

Four fingertip markers drive the pointer: green steers the cursor, red is
the primary button, blue the secondary, yellow scrolls. Detection is a
per-color HSV threshold followed by a largest-blob pick; actions come from
frame-to-frame transitions of those observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

from .imaging import ChannelRange, HsvFrame, threshold_mask
from .segmentation import extract_blobs

#: Calibrated HSV windows per marker, hue on the half-degree [0, 180) scale.
#: The yellow and green bands sit in each other's conventional hue territory;
#: that is how the dye/lighting combination on the rig measures, so the
#: windows are kept as calibrated rather than renamed.
DEFAULT_PALETTE: Dict[str, ChannelRange] = {
    "red": ChannelRange("hsv", {"h": (0, 6), "s": (135, 255), "v": (110, 255)}),
    "green": ChannelRange("hsv", {"h": (20, 36), "s": (165, 255), "v": (165, 255)}),
    "yellow": ChannelRange("hsv", {"h": (68, 85), "s": (59, 255), "v": (80, 255)}),
    "blue": ChannelRange("hsv", {"h": (112, 119), "s": (53, 255), "v": (10, 255)}),
}

MARKER_COLORS = ("red", "green", "yellow", "blue")


@dataclass(frozen=True)
class MarkerObservation:
    """Largest blob inside one marker's color window; centroid is (cy, cx)."""

    color: str
    centroid: tuple[float, float]
    area: int


def detect_markers(hsv: HsvFrame, palette: Dict[str, ChannelRange] = DEFAULT_PALETTE,
                   min_area: int = 25) -> Dict[str, Optional[MarkerObservation]]:
    """Locate each palette color in the frame.

    Regions below min_area are treated as noise. A color maps to None when
    nothing qualifies; otherwise to its largest qualifying blob.
    """
    found: Dict[str, Optional[MarkerObservation]] = {}
    for color, crange in palette.items():
        blobs = extract_blobs(threshold_mask(hsv, crange), min_area=min_area)
        if blobs:
            best = blobs[0]
            found[color] = MarkerObservation(color=color, centroid=best.centroid,
                                             area=best.area)
        else:
            found[color] = None
    return found


@dataclass(frozen=True)
class CursorMap:
    """Affine map from video coordinates to screen coordinates.

    X' = alpha * cx * screen_w / video_w + delta
    Y' = beta  * cy * screen_h / video_h + gamma

    Results are rounded half-up and clamped to the screen rectangle.
    """

    video_w: int
    video_h: int
    screen_w: int
    screen_h: int
    alpha: float = 1.0
    beta: float = 1.0
    delta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        for name in ("video_w", "video_h", "screen_w", "screen_h"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def map(self, cx: float, cy: float) -> tuple[int, int]:
        x = (self.alpha * cx * self.screen_w) / self.video_w + self.delta
        y = (self.beta * cy * self.screen_h) / self.video_h + self.gamma
        xi = min(self.screen_w - 1, max(0, int(math.floor(x + 0.5))))
        yi = min(self.screen_h - 1, max(0, int(math.floor(y + 0.5))))
        return xi, yi


@dataclass(frozen=True)
class ActionConfig:
    """Tunables for the pointer rules; defaults match the rig calibration."""

    min_area: int = 25
    hold_frames: int = 3
    scroll_scale: float = 1.0


@dataclass(frozen=True)
class PointerEvent:
    kind: str
    x: Optional[int] = None
    y: Optional[int] = None
    amount: Optional[float] = None


class MarkerTracker:
    """Stateful frame-to-frame rules turning marker observations into events.

    Per frame, in this order:
      move        green visible (cursor follows its centroid)
      left_click  red newly visible; lands on green if green is up, else on red
      right_click blue newly visible; same anchor rule as left_click
      scroll      yellow visible now and in the previous frame; the amount is
                  the signed vertical centroid travel times scroll_scale, so
                  an upward-moving marker scrolls negative
      drag_start  red has been held hold_frames consecutive frames with green
                  in view (fires once per hold)
      drag_end    an active drag's red marker disappeared
    """

    def __init__(self, cursor: CursorMap, config: ActionConfig = ActionConfig()):
        self.cursor = cursor
        self.config = config
        self._prev: Dict[str, Optional[MarkerObservation]] = {c: None for c in MARKER_COLORS}
        self._red_run = 0
        self._dragging = False

    def _mapped(self, obs: MarkerObservation) -> tuple[int, int]:
        cy, cx = obs.centroid
        return self.cursor.map(cx, cy)

    def step(self, markers: Dict[str, Optional[MarkerObservation]]) -> list[PointerEvent]:
        events: list[PointerEvent] = []
        green = markers.get("green")
        red = markers.get("red")
        blue = markers.get("blue")
        yellow = markers.get("yellow")
        prev_yellow = self._prev.get("yellow")

        if green is not None:
            x, y = self._mapped(green)
            events.append(PointerEvent("move", x=x, y=y))

        if red is not None and self._prev.get("red") is None:
            x, y = self._mapped(green if green is not None else red)
            events.append(PointerEvent("left_click", x=x, y=y))

        if blue is not None and self._prev.get("blue") is None:
            x, y = self._mapped(green if green is not None else blue)
            events.append(PointerEvent("right_click", x=x, y=y))

        if yellow is not None and prev_yellow is not None:
            travel = yellow.centroid[0] - prev_yellow.centroid[0]
            events.append(PointerEvent("scroll", amount=travel * self.config.scroll_scale))

        self._red_run = self._red_run + 1 if red is not None else 0
        if (not self._dragging and green is not None
                and self._red_run >= self.config.hold_frames):
            x, y = self._mapped(green)
            events.append(PointerEvent("drag_start", x=x, y=y))
            self._dragging = True
        if self._dragging and red is None:
            if green is not None:
                x, y = self._mapped(green)
                events.append(PointerEvent("drag_end", x=x, y=y))
            else:
                events.append(PointerEvent("drag_end"))
            self._dragging = False

        self._prev = {c: markers.get(c) for c in MARKER_COLORS}
        return events
