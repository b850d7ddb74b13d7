"""Offline perception pipeline over directories of captured frames.

Frames are NetPBM files named frame_<number>.ppm (or .pgm); ordering is by
the embedded number alone, never by directory listing order. Each frame runs
through two independent routes:

  gesture route: skin mask -> largest blob -> silhouette -> classifier ->
                 temporal confirmation -> one event per confirmed change
  pointer route: HSV marker detection -> frame-to-frame action rules

Results merge into a single event list ordered by frame, gesture events
ahead of pointer events within a frame. Given the same inputs and weights,
two runs produce byte-identical logs.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .classifier import Network, predict
from .debounce import Debouncer
from .imaging import (
    ChannelRange,
    Frame,
    NetpbmError,
    SKIN_RANGE,
    decode_netpbm,
    rgb_to_hsv,
    rgb_to_ycbcr,
    threshold_mask,
)
from .markers import ActionConfig, CursorMap, MARKER_COLORS, MarkerTracker, detect_markers
from .segmentation import blob_silhouette, extract_blobs, label_components


class StreamError(RuntimeError):
    """A frame directory cannot be turned into a valid frame sequence."""


_FRAME_NAME = re.compile(r"frame_(\d+)\.(ppm|pgm)$")


@dataclass
class PipelineConfig:
    ycbcr_mode: str = "verbatim"
    skin_range: ChannelRange = SKIN_RANGE
    gesture_min_area: int = 100
    debounce_depth: int = 5
    debounce_threshold: float = 0.95
    marker_min_area: int = 25
    action: ActionConfig = field(default_factory=ActionConfig)
    cursor: Optional[CursorMap] = None  # None: identity map sized to the video


@dataclass
class PipelineResult:
    events: list[dict] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)


def scan_frame_files(directory: str) -> list[tuple[int, str]]:
    """List (frame_number, path) pairs sorted by frame number.

    Files not matching the frame_<number>.<ppm|pgm> pattern are ignored.
    Duplicate numbers (frame_1 vs frame_0001) make the ordering ambiguous
    and raise StreamError.
    """
    pairs = []
    for name in os.listdir(directory):
        match = _FRAME_NAME.fullmatch(name)
        if match:
            pairs.append((int(match.group(1)), os.path.join(directory, name)))
    if not pairs:
        raise StreamError(f"no frame_<number>.ppm/.pgm files in {directory}")
    pairs.sort()
    for (a, path_a), (b, path_b) in zip(pairs, pairs[1:]):
        if a == b:
            raise StreamError(f"duplicate frame number {a}: {path_a} vs {path_b}")
    return pairs


def load_frames(directory: str) -> Iterator[tuple[int, Frame]]:
    """Decode a frame directory in order, enforcing uniform dimensions."""
    dims = None
    for number, path in scan_frame_files(directory):
        try:
            with open(path, "rb") as fh:
                frame = decode_netpbm(fh.read())
        except NetpbmError as err:
            raise StreamError(f"{path}: {err}") from err
        if dims is None:
            dims = (frame.height, frame.width)
        elif (frame.height, frame.width) != dims:
            raise StreamError(
                f"{path}: {frame.width}x{frame.height} breaks stream dimensions "
                f"{dims[1]}x{dims[0]}"
            )
        yield number, frame


class GesturePipeline:
    """Streaming core: feed frames in order, collect events and a trace."""

    def __init__(self, net: Optional[Network], config: Optional[PipelineConfig] = None):
        self.net = net
        self.config = config or PipelineConfig()
        self._debouncer = Debouncer(self.config.debounce_depth,
                                    self.config.debounce_threshold)
        self._prev_stable = 0
        self._tracker: Optional[MarkerTracker] = None

    def _tracker_for(self, frame: Frame) -> MarkerTracker:
        if self._tracker is None:
            cursor = self.config.cursor or CursorMap(
                video_w=frame.width, video_h=frame.height,
                screen_w=frame.width, screen_h=frame.height,
            )
            self._tracker = MarkerTracker(cursor, self.config.action)
        return self._tracker

    def step(self, number: int, frame: Frame) -> tuple[list[dict], dict]:
        """Process one frame; returns (events, trace_row)."""
        if frame.channels != 3:
            raise StreamError(f"frame {number}: pipeline needs color frames, got grayscale")
        events: list[dict] = []

        num: Optional[int] = None
        num_prob: Optional[float] = None
        if self.net is not None:
            mask = threshold_mask(
                rgb_to_ycbcr(frame, mode=self.config.ycbcr_mode), self.config.skin_range)
            blobs = extract_blobs(mask, min_area=self.config.gesture_min_area)
            if blobs:
                labels, _ = label_components(mask)
                silhouette = blob_silhouette(mask, blobs[0], labels=labels)
                prediction = predict(self.net, silhouette.ravel())
                num, num_prob = prediction.num, prediction.num_prob
        stable = self._debouncer.push(num or 0, num_prob)
        if stable != 0 and stable != self._prev_stable:
            events.append({"frame": number, "kind": "gesture", "g": stable})
        self._prev_stable = stable

        markers = detect_markers(rgb_to_hsv(frame), min_area=self.config.marker_min_area)
        for ev in self._tracker_for(frame).step(markers):
            row = {"frame": number, "kind": ev.kind}
            if ev.x is not None:
                row["x"] = ev.x
                row["y"] = ev.y
            if ev.amount is not None:
                row["amount"] = ev.amount
            events.append(row)

        trace = {
            "frame": number,
            "num": num,
            "num_prob": num_prob,
            "stable": stable,
            "markers": {
                color: (list(markers[color].centroid) if markers[color] else None)
                for color in MARKER_COLORS
            },
        }
        return events, trace

    def run(self, frames: Iterable[tuple[int, Frame]]) -> PipelineResult:
        result = PipelineResult()
        for number, frame in frames:
            events, trace = self.step(number, frame)
            result.events.extend(events)
            result.trace.append(trace)
        return result


def run_directory(directory: str, net: Optional[Network],
                  config: Optional[PipelineConfig] = None) -> PipelineResult:
    return GesturePipeline(net, config).run(load_frames(directory))


def write_jsonl(path: str, rows: Iterable[dict]) -> None:
    """One compact JSON object per line; written atomically."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, separators=(",", ":")))
            fh.write("\n")
    os.replace(tmp, path)
