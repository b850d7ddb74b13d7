"""Shared fixtures: synthetic video frames and a hand-set probe network."""

import os

import numpy as np
import pytest

from gesturelab.classifier import Network
from gesturelab.imaging import Frame, encode_netpbm

# RGB swatches calibrated against the default color windows: each marker
# color lands in exactly its own HSV band, and "skin" lands in the Cb/Cr
# skin window without touching any marker band.
SWATCH = {
    "red": (220, 30, 20),
    "green": (200, 180, 20),
    "yellow": (20, 200, 120),
    "blue": (30, 60, 200),
    "skin": (120, 30, 120),
}


def make_frame(width=160, height=120, skin_rect=None, markers=None) -> Frame:
    """Compose a test frame.

    skin_rect: (y, x, h, w) rectangle filled with the skin swatch.
    markers: dict of color -> (y, x) top-left of a 10x10 marker patch.
    """
    pixels = np.zeros((height, width, 3), dtype=np.uint8)
    if skin_rect is not None:
        y, x, h, w = skin_rect
        pixels[y:y + h, x:x + w] = SWATCH["skin"]
    for color, (y, x) in (markers or {}).items():
        pixels[y:y + 10, x:x + 10] = SWATCH[color]
    return Frame(pixels)


def write_frames(directory, frames, start=1) -> None:
    os.makedirs(directory, exist_ok=True)
    for offset, frame in enumerate(frames):
        path = os.path.join(directory, f"frame_{start + offset:06d}.ppm")
        with open(path, "wb") as fh:
            fh.write(encode_netpbm(frame))


def corner_probe_net(gesture: int = 3) -> Network:
    """A net with hand-set weights that fires on box-filling silhouettes.

    The single hidden unit checks the four corners of the 50x50 silhouette;
    a solid rectangle fills its own bounding box, so all corners are 1 and
    the unit saturates high. The output layer then drives class `gesture`
    to sigmoid(6) ~ 0.9975 (comfortably above the 0.95 confirmation bar)
    and every other class to sigmoid(-6). Lets pipeline tests run a real
    classifier without training.
    """
    w1 = np.zeros((1, 2500))
    for corner in (0, 49, 2450, 2499):
        w1[0, corner] = 10.0
    w2 = np.zeros((10, 1))
    w2[gesture - 1, 0] = 12.0
    return Network(
        arch=(2500, 1, 10),
        weights=[w1, w2],
        biases=[np.array([-20.0]), np.full(10, -6.0)],
    )


@pytest.fixture
def probe_net():
    return corner_probe_net()
