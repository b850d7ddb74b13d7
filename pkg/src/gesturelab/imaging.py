"""Pixel-level primitives: NetPBM frame I/O, color-space conversions, threshold masks.

Everything here is a pure function over immutable value types. Rasters are
numpy arrays of dtype uint8; conversions run in double precision and are
rounded half-up, then clamped to [0, 255], so results are reproducible
bit-for-bit against a scalar evaluation of the same formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

YCBCR_CHANNELS = ("y", "cb", "cr")
HSV_CHANNELS = ("h", "s", "v")


class NetpbmError(ValueError):
    """Raised when a NetPBM byte stream cannot be decoded."""


def _check_raster(pixels: np.ndarray, channels: int, name: str) -> None:
    if not isinstance(pixels, np.ndarray) or pixels.dtype != np.uint8:
        raise ValueError(f"{name} pixels must be a uint8 numpy array")
    if channels == 1:
        if pixels.ndim != 2:
            raise ValueError(f"{name} expects a (height, width) array, got shape {pixels.shape}")
    elif pixels.ndim != 3 or pixels.shape[2] != channels:
        raise ValueError(f"{name} expects a (height, width, {channels}) array, got shape {pixels.shape}")
    if pixels.shape[0] < 1 or pixels.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel")


@dataclass(frozen=True)
class Frame:
    """A decoded raster: (h, w) uint8 grayscale or (h, w, 3) uint8 RGB."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        if not isinstance(self.pixels, np.ndarray) or self.pixels.dtype != np.uint8:
            raise ValueError("Frame pixels must be a uint8 numpy array")
        if self.pixels.ndim == 2:
            pass
        elif self.pixels.ndim == 3 and self.pixels.shape[2] == 3:
            pass
        else:
            raise ValueError(f"Frame expects (h, w) or (h, w, 3), got shape {self.pixels.shape}")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValueError("Frame must have at least one pixel")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


@dataclass(frozen=True)
class YCbCrFrame:
    """Per-pixel (Y, Cb, Cr) as uint8, same dimensions as the source frame."""

    pixels: np.ndarray
    space = "ycbcr"

    def __post_init__(self) -> None:
        _check_raster(self.pixels, 3, "YCbCrFrame")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class HsvFrame:
    """Per-pixel (H, S, V) with H in [0, 180) and S, V in [0, 255]."""

    pixels: np.ndarray
    space = "hsv"

    def __post_init__(self) -> None:
        _check_raster(self.pixels, 3, "HsvFrame")
        if self.pixels[:, :, 0].max(initial=0) > 179:
            raise ValueError("HsvFrame hue channel must stay below 180")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel foreground mask; the only legal sample values are 0 and 255."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        _check_raster(self.pixels, 1, "BinaryMask")
        bad = (self.pixels != 0) & (self.pixels != 255)
        if bad.any():
            raise ValueError("BinaryMask may only contain the values 0 and 255")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def foreground_count(self) -> int:
        return int((self.pixels == 255).sum())


@dataclass(frozen=True)
class ChannelRange:
    """Inclusive per-channel bounds used by :func:`threshold_mask`.

    Channels absent from ``bounds`` are not tested. ``space`` names the
    color space the bounds apply to ("ycbcr" or "hsv").
    """

    space: str
    bounds: Mapping[str, tuple[int, int]]

    def __post_init__(self) -> None:
        names = {"ycbcr": YCBCR_CHANNELS, "hsv": HSV_CHANNELS}.get(self.space)
        if names is None:
            raise ValueError(f"unknown color space {self.space!r}")
        if not self.bounds:
            raise ValueError("ChannelRange must test at least one channel")
        for chan, (lo, hi) in self.bounds.items():
            if chan not in names:
                raise ValueError(f"channel {chan!r} is not part of {self.space}")
            if lo > hi:
                raise ValueError(f"channel {chan!r} has min {lo} > max {hi}")
        object.__setattr__(self, "bounds", dict(self.bounds))


#: Cb/Cr window that isolates skin tones; Y is deliberately untested so the
#: mask tolerates illumination changes.
SKIN_RANGE = ChannelRange("ycbcr", {"cb": (80, 135), "cr": (130, 185)})


# --- NetPBM (P5/P6, maxval 255, binary body) ---------------------------------

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _skip_separators(data: bytes, pos: int) -> int:
    while pos < len(data):
        ch = data[pos]
        if ch in _WHITESPACE:
            pos += 1
        elif ch == 0x23:  # '#': comment runs to end of line
            nl = data.find(b"\n", pos)
            if nl == -1:
                raise NetpbmError(f"unterminated comment starting at byte {pos}")
            pos = nl + 1
        else:
            break
    return pos


def _read_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    pos = _skip_separators(data, pos)
    start = pos
    while pos < len(data) and 0x30 <= data[pos] <= 0x39:
        pos += 1
    if pos == start:
        raise NetpbmError(f"expected {what} at byte {start}")
    return int(data[start:pos]), pos


def decode_netpbm(data: bytes) -> Frame:
    """Decode a binary NetPBM file (P5 grayscale or P6 RGB, maxval 255).

    Header comment lines starting with ``#`` are skipped. Raises
    :class:`NetpbmError` naming the offending byte offset on malformed input.
    """
    if len(data) < 2 or data[0:1] != b"P":
        raise NetpbmError("not a NetPBM file: missing magic at byte 0")
    magic = data[0:2]
    if magic == b"P6":
        channels = 3
    elif magic == b"P5":
        channels = 1
    else:
        raise NetpbmError(f"unsupported magic {magic!r} at byte 0 (want P5 or P6)")

    width, pos = _read_int(data, 2, "width")
    height, pos = _read_int(data, pos, "height")
    maxval, pos = _read_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise NetpbmError(f"illegal dimensions {width}x{height} in header")
    if maxval != 255:
        raise NetpbmError(f"unsupported maxval {maxval} (only 255) ending at byte {pos}")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise NetpbmError(f"expected single whitespace before body at byte {pos}")
    pos += 1

    n = width * height * channels
    body = data[pos:pos + n]
    if len(body) < n:
        raise NetpbmError(
            f"truncated body at byte {pos + len(body)}: need {n} samples, got {len(body)}"
        )
    pixels = np.frombuffer(body, dtype=np.uint8).copy()
    shape = (height, width) if channels == 1 else (height, width, 3)
    return Frame(pixels.reshape(shape))


def encode_netpbm(frame: Frame) -> bytes:
    """Encode a frame in canonical binary form: ``P5|P6\\n<w> <h>\\n255\\n<body>``."""
    magic = b"P6" if frame.channels == 3 else b"P5"
    header = b"%s\n%d %d\n255\n" % (magic, frame.width, frame.height)
    return header + frame.pixels.tobytes()


# --- RGB -> YCbCr -------------------------------------------------------------


def rgb_to_ycbcr(frame: Frame, mode: str = "verbatim") -> YCbCrFrame:
    """Convert an RGB frame to YCbCr.

    mode="verbatim" applies the engine's fixed coefficient set exactly as
    written below. Note that its chroma rows are not a self-consistent matrix
    (mixed 1.18556/1.8556 divisors, a 0.05 blue term) and gray does not map
    to Cb=128; it is kept because the default skin thresholds were chosen
    against it. mode="standard" is ITU-R BT.601 studio swing (Y in [16, 235],
    chroma centered on 128) for use with conventionally converted material.
    """
    if frame.channels != 3:
        raise ValueError("rgb_to_ycbcr needs a 3-channel frame, got grayscale")
    rgb = frame.pixels.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]

    if mode == "verbatim":
        y = 0.2126 * (219 / 255) * r + 0.7152 * (219 / 255) * g + 0.0722 * (219 / 255) * b + 16
        cb = -0.2126 / 1.18556 * (224 / 255) * r - 0.7152 / 1.8556 * (224 / 255) * g \
            + 0.05 * (219 / 255) * b + 128
        cr = 0.5 * (224 / 255) * r - 0.7152 / 1.5748 * (224 / 255) * g \
            + 0.0722 / 1.5748 * (219 / 255) * b + 128
    elif mode == "standard":
        ey = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0
        y = 16 + 219 * ey
        cb = 128 + 224 * (0.5 * (b / 255.0 - ey) / (1 - 0.114))
        cr = 128 + 224 * (0.5 * (r / 255.0 - ey) / (1 - 0.299))
    else:
        raise ValueError(f"unknown conversion mode {mode!r} (want 'verbatim' or 'standard')")

    out = np.stack([_round_clamp(y), _round_clamp(cb), _round_clamp(cr)], axis=2)
    return YCbCrFrame(out)


def _round_clamp(values: np.ndarray) -> np.ndarray:
    """Round half-up, then clamp to the 8-bit range."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


# --- RGB -> HSV ---------------------------------------------------------------


def rgb_to_hsv(frame: Frame) -> HsvFrame:
    """Convert an RGB frame to HSV with H in [0, 180) and S, V in [0, 255].

    The half-degree hue scale is the one the default marker thresholds are
    expressed in. Achromatic pixels get hue 0 by definition.
    """
    if frame.channels != 3:
        raise ValueError("rgb_to_hsv needs a 3-channel frame, got grayscale")
    rgb = frame.pixels.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]

    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn

    safe_delta = np.where(delta == 0, 1.0, delta)
    h_deg = np.select(
        [delta == 0, mx == r, mx == g],
        [0.0,
         (60.0 * (g - b) / safe_delta) % 360.0,
         60.0 * (b - r) / safe_delta + 120.0],
        default=60.0 * (r - g) / safe_delta + 240.0,
    )
    h = np.floor(h_deg / 2.0 + 0.5).astype(np.int64) % 180

    safe_mx = np.where(mx == 0, 1.0, mx)
    s = np.where(mx == 0, 0, np.clip(np.floor(255.0 * delta / safe_mx + 0.5), 0, 255))

    out = np.stack([h.astype(np.uint8), s.astype(np.uint8), mx.astype(np.uint8)], axis=2)
    return HsvFrame(out)


# --- Thresholding -------------------------------------------------------------

_CHANNEL_INDEX = {
    "y": 0, "cb": 1, "cr": 2,
    "h": 0, "s": 1, "v": 2,
}


def threshold_mask(frame: Union[YCbCrFrame, HsvFrame], crange: ChannelRange) -> BinaryMask:
    """Mark a pixel 255 iff every tested channel lies inside its inclusive range.

    Channels not named in the range are ignored. The range's color space must
    match the frame's.
    """
    if crange.space != frame.space:
        raise ValueError(
            f"range is for {crange.space!r} but frame is {frame.space!r}"
        )
    keep = np.ones(frame.pixels.shape[:2], dtype=bool)
    for chan, (lo, hi) in crange.bounds.items():
        values = frame.pixels[:, :, _CHANNEL_INDEX[chan]]
        keep &= (values >= lo) & (values <= hi)
    return BinaryMask(np.where(keep, 255, 0).astype(np.uint8))
