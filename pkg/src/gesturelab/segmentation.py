"""Connected components, blob geometry, and fixed-size silhouettes.

Labeling is delegated to scipy.ndimage (C implementation); everything the
rest of the engine consumes (areas, boxes, centroids, the 50x50 classifier
silhouette) is computed here with plain numpy so the behavior is pinned by
this module, not by scipy version details.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import BinaryMask

#: Classifier silhouettes are SILHOUETTE_SIZE x SILHOUETTE_SIZE.
SILHOUETTE_SIZE = 50


@dataclass(frozen=True)
class Blob:
    """One connected foreground region.

    bbox is (min_y, min_x, max_y, max_x), inclusive on all sides. centroid
    is the arithmetic mean of the member pixel coordinates as (cy, cx);
    for symmetric regions it falls between pixels.
    """

    label: int
    area: int
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 8:
        return np.ones((3, 3), dtype=bool)
    if connectivity == 4:
        return np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def label_components(mask: BinaryMask, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label connected foreground regions; returns (labels, count).

    labels is an int array of the mask's shape with 0 for background and
    1..count for regions. Diagonal neighbors join under the default
    8-connectivity and stay separate under 4.
    """
    labels, count = ndimage.label(mask.pixels == 255, structure=_structure(connectivity))
    return labels, int(count)


def extract_blobs(mask: BinaryMask, min_area: int = 1, connectivity: int = 8) -> list[Blob]:
    """Find foreground blobs of at least min_area pixels.

    Returned largest first; equal areas order by bounding-box top-left,
    row before column, so repeat runs list identical scenes identically.
    """
    labels, count = label_components(mask, connectivity)
    if count == 0:
        return []

    flat = labels.ravel()
    fg = flat.nonzero()[0]
    ids = flat[fg]
    areas = np.bincount(ids, minlength=count + 1)
    ys, xs = np.divmod(fg, labels.shape[1])
    sum_y = np.bincount(ids, weights=ys, minlength=count + 1)
    sum_x = np.bincount(ids, weights=xs, minlength=count + 1)
    boxes = ndimage.find_objects(labels)

    blobs = []
    for lab in range(1, count + 1):
        area = int(areas[lab])
        if area < min_area:
            continue
        sl_y, sl_x = boxes[lab - 1]
        blobs.append(Blob(
            label=lab,
            area=area,
            bbox=(sl_y.start, sl_x.start, sl_y.stop - 1, sl_x.stop - 1),
            centroid=(sum_y[lab] / area, sum_x[lab] / area),
        ))
    blobs.sort(key=lambda b: (-b.area, b.bbox[0], b.bbox[1]))
    return blobs


def blob_silhouette(mask: BinaryMask, blob: Blob, size: int = SILHOUETTE_SIZE,
                    connectivity: int = 8, labels: np.ndarray | None = None) -> np.ndarray:
    """Render one blob as a size x size float array of 0.0/1.0.

    The blob's bounding box is cropped out and resampled with nearest
    neighbor (source index = dst_index * src_extent // size). Only pixels
    belonging to this blob count as foreground, so an overlapping box of
    some other region cannot bleed in. Pass labels to reuse an existing
    label map instead of recomputing it.
    """
    if labels is None:
        labels, _ = label_components(mask, connectivity)
    y0, x0, y1, x1 = blob.bbox
    member = labels[y0:y1 + 1, x0:x1 + 1] == blob.label
    rows = (np.arange(size) * member.shape[0]) // size
    cols = (np.arange(size) * member.shape[1]) // size
    return member[np.ix_(rows, cols)].astype(np.float64)


def classifier_input(mask: BinaryMask, blob: Blob, size: int = SILHOUETTE_SIZE) -> np.ndarray:
    """Flatten a blob silhouette into the size*size vector the classifier takes."""
    return blob_silhouette(mask, blob, size).ravel()
