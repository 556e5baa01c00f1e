# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..utils.check import check_open_interval

__all__ = ['BBox',
           'FrameGeometry',
           'DEFAULT_IOU_THRESHOLD',
           'DEFAULT_EDGE_BAND',
           'iou',
           'iou_matrix',
           'boxes_match',
           'min_dist',
           'touches_edge',
           'boxes_to_array',
           ]

DEFAULT_IOU_THRESHOLD = 0.5
DEFAULT_EDGE_BAND = 0.03


@dataclass(frozen=True)
class BBox:
    """ Axis-aligned bounding box in image pixel coordinates.

    The origin is the top-left corner of the image, so ``y_min`` is the top
    side of the box. Coordinates are real-valued.

    Parameters
    ----------
    x_min, y_min, x_max, y_max: float
        Box corners. The box must have strictly positive area and finite coordinates.
    """
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = tuple(float(c) for c in (self.x_min, self.y_min, self.x_max, self.y_max))
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f'Box coordinates must be finite. Got {coords}')
        x_min, y_min, x_max, y_max = coords
        if not (x_min < x_max and y_min < y_max):
            raise ValueError(f'Box must have strictly positive area. Got {coords}')
        # Normalize to float, so that BBox(0, 0, 1, 1) == BBox(0., 0., 1., 1.)
        for name, value in zip(('x_min', 'y_min', 'x_max', 'y_max'), coords):
            object.__setattr__(self, name, value)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x_min + self.x_max) / 2., (self.y_min + self.y_max) / 2.

    def to_array(self) -> np.ndarray:
        return np.array([self.x_min, self.y_min, self.x_max, self.y_max], dtype=float)

    @classmethod
    def from_array(cls, values) -> BBox:
        x_min, y_min, x_max, y_max = (float(v) for v in values)
        return cls(x_min, y_min, x_max, y_max)

    def clip(self, width: float, height: float) -> Optional[BBox]:
        """ Clip to the frame [0, width] x [0, height]. Returns None if nothing remains. """
        x_min, y_min = max(self.x_min, 0.), max(self.y_min, 0.)
        x_max, y_max = min(self.x_max, float(width)), min(self.y_max, float(height))
        if x_min >= x_max or y_min >= y_max:
            return None
        return BBox(x_min, y_min, x_max, y_max)


@dataclass(frozen=True)
class FrameGeometry:
    """ Frame dimensions and the width of the border band used to spot newly entering objects.

    Parameters
    ----------
    width, height: int
        Frame size in pixels.

    edge_band_fraction: float, default = 0.03
        Band width as a fraction of the shorter frame side, in (0, 0.5).
    """
    width: int
    height: int
    edge_band_fraction: float = DEFAULT_EDGE_BAND

    def __post_init__(self):
        for name in ('width', 'height'):
            value = getattr(self, name)
            if not np.issubdtype(type(value), np.integer) or value < 1:
                raise ValueError(f'Frame {name} must be a positive integer. Got {value!r}')
            object.__setattr__(self, name, int(value))
        check_open_interval(self.edge_band_fraction, 0., 0.5, 'edge_band_fraction')

    @property
    def area(self) -> float:
        return float(self.width * self.height)

    @property
    def edge_band(self) -> float:
        return self.edge_band_fraction * min(self.width, self.height)

    @property
    def resolution(self) -> str:
        return f'{self.width}x{self.height}'


def boxes_to_array(boxes: Sequence[BBox]) -> np.ndarray:
    """ Stack boxes into an array of shape (n_boxes, 4). """
    if len(boxes) == 0:
        return np.empty((0, 4), dtype=float)
    return np.array([[b.x_min, b.y_min, b.x_max, b.y_max] for b in boxes], dtype=float)


def iou(a: BBox, b: BBox) -> float:
    """ Intersection over union of two boxes.

    Returns
    -------
    float
        Intersection area divided by union area, in [0, 1]; 0 for disjoint boxes.
    """
    if not isinstance(a, BBox) or not isinstance(b, BBox):
        raise TypeError(f'iou expects BBox instances. Got {type(a)} and {type(b)}')
    inter_w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    inter_h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if inter_w <= 0 or inter_h <= 0:
        return 0.
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def iou_matrix(boxes_a, boxes_b) -> np.ndarray:
    """ Pairwise IoU between two sets of boxes.

    Parameters
    ----------
    boxes_a: array-like, shape (n, 4), or sequence of BBox
    boxes_b: array-like, shape (m, 4), or sequence of BBox

    Returns
    -------
    np.ndarray, shape (n, m)
        Rows containing NaN coordinates (absent boxes) yield IoU 0.
    """
    a = _as_array(boxes_a)
    b = _as_array(boxes_b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    ax1, ay1, ax2, ay2 = np.split(a, 4, axis=1)
    bx1, by1, bx2, by2 = np.split(b, 4, axis=1)
    inter_w = np.maximum(np.minimum(ax2, bx2.T) - np.maximum(ax1, bx1.T), 0.)
    inter_h = np.maximum(np.minimum(ay2, by2.T) - np.maximum(ay1, by1.T), 0.)
    inter = inter_w * inter_h
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = area_a + area_b.T - inter
    with np.errstate(invalid='ignore', divide='ignore'):
        result = np.where(inter > 0, inter / union, 0.)
    return np.nan_to_num(result, nan=0.)


def _as_array(boxes) -> np.ndarray:
    if isinstance(boxes, np.ndarray):
        return boxes.reshape(-1, 4).astype(float, copy=False)
    boxes = list(boxes)
    if len(boxes) and isinstance(boxes[0], BBox):
        return boxes_to_array(boxes)
    return np.asarray(boxes, dtype=float).reshape(-1, 4)


def boxes_match(a: BBox, b: BBox, threshold: float = DEFAULT_IOU_THRESHOLD) -> bool:
    """ True iff iou(a, b) > threshold. """
    check_open_interval(threshold, 0., 1., 'threshold')
    return iou(a, b) > threshold


def min_dist(b: BBox, boxes: Sequence[BBox]) -> float:
    """ Minimum center-to-center distance between `b` and a set of boxes.

    The distance is 0 when `b` overlaps any box of the set, and +inf for an empty set.
    """
    if len(boxes) == 0:
        return math.inf
    if np.any(iou_matrix([b], boxes) > 0):
        return 0.
    centers = np.array([box.center for box in boxes])
    return float(cdist(np.array([b.center]), centers).min())


def touches_edge(b: BBox, g: FrameGeometry) -> bool:
    """ True iff a side of `b` lies within the edge band of the corresponding frame border. """
    band = g.edge_band
    return (b.x_min <= band
            or b.y_min <= band
            or b.x_max >= g.width - band
            or b.y_max >= g.height - band)
