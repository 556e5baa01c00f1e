# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Inspection order: which camera, and which box on it, to examine first.

Cameras that held many (and large) targets in the previous frame are
likely to hold them again; boxes close to previous targets likely are the
targets. Inspecting these first lets the search stop early.
"""
from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import Dict, List, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ..geometry import BBox, boxes_to_array, iou_matrix

__all__ = ['INSPECTION_ORDERS',
           'InspectionState',
           'camera_priority',
           'order_cameras',
           'box_order',
           'order_boxes',
           ]

INSPECTION_ORDERS = ('dynamic', 'static', 'reverse', 'crowded_first')


@dataclass
class InspectionState:
    """ What the previous frame revealed about each camera.

    Parameters
    ----------
    n_queries: int
        Number of query objects.

    alpha: float, default = 0.5
        Weight of the found-target ratio against the target size term.

    found: dict of camera id -> int
        Targets found on each camera in the previous frame.

    boxes: dict of camera id -> list of BBox
        Their boxes.

    frame_area: dict of camera id -> float
        Frame area in pixels^2; the size term uses ``c = 1 / frame_area``.

    detections: dict of camera id -> int
        Label-matching detections of each camera in the previous frame.
    """
    n_queries: int
    alpha: float = 0.5
    found: Dict[str, int] = field(default_factory=dict)
    boxes: Dict[str, List[BBox]] = field(default_factory=dict)
    frame_area: Dict[str, float] = field(default_factory=dict)
    detections: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0. <= self.alpha <= 1.:
            raise ValueError(f'alpha must be in [0, 1]. Got {self.alpha}')
        if self.n_queries < 0:
            raise ValueError(f'Number of queries must be non-negative. Got {self.n_queries}')

    def update(self, camera_id: str, boxes: Sequence[BBox], n_detections: int = 0):
        """ Record the targets found on a camera in the current frame. """
        if len(boxes) > self.n_queries:
            raise ValueError(f'Found {len(boxes)} targets on {camera_id}, but there are {self.n_queries} queries')
        self.found[camera_id] = len(boxes)
        self.boxes[camera_id] = list(boxes)
        self.detections[camera_id] = n_detections


def camera_priority(state: InspectionState, camera_id: str) -> float:
    """ Priority of a camera, higher is inspected earlier.

    ``alpha * N_prev / N_Q + (1 - alpha) * sum_j c * size(box_j)`` over the
    targets found on the camera in the previous frame.
    """
    if state.n_queries == 0:
        raise ValueError('Camera priority is undefined without queries')
    ratio = state.found.get(camera_id, 0) / state.n_queries
    boxes = state.boxes.get(camera_id, [])
    size = 0.
    if boxes:
        size = sum(b.area for b in boxes) / state.frame_area[camera_id]
    return state.alpha * ratio + (1. - state.alpha) * size


def order_cameras(state: InspectionState, cameras: Sequence[str], order: str = 'dynamic') -> List[str]:
    """ Inspection order of cameras.

    Parameters
    ----------
    state: InspectionState

    cameras: sequence of str

    order: {'dynamic', 'static', 'reverse', 'crowded_first'}
        - 'dynamic' by priority descending, ties by camera id
        - 'static' by camera id
        - 'reverse' the dynamic order reversed
        - 'crowded_first' by previous label-matching detections descending, ties by camera id
    """
    if order == 'static':
        return sorted(cameras)
    if order == 'crowded_first':
        return sorted(cameras, key=lambda c: (-state.detections.get(c, 0), c))
    if order not in ('dynamic', 'reverse'):
        raise ValueError(f'Unknown inspection order {order!r}. Choose one of {INSPECTION_ORDERS}')
    dynamic = sorted(cameras, key=lambda c: (-camera_priority(state, c), c))
    return dynamic[::-1] if order == 'reverse' else dynamic


def _min_distances(boxes: np.ndarray, previous: np.ndarray) -> np.ndarray:
    if previous.shape[0] == 0:
        return np.full(boxes.shape[0], math.inf)
    centers = (boxes[:, :2] + boxes[:, 2:]) / 2
    previous_centers = (previous[:, :2] + previous[:, 2:]) / 2
    distances = cdist(centers, previous_centers)
    distances[iou_matrix(boxes, previous) > 0] = 0.
    return distances.min(axis=1)


def box_order(boxes: Sequence[BBox], previous: Sequence[BBox], order: str = 'dynamic') -> List[int]:
    """ Indices of `boxes` in inspection order.

    'dynamic' sorts by the distance to the nearest previous target (0 on
    overlap, +inf without previous targets), then leftmost, then topmost.
    'reverse' inverts that order; 'static' and 'crowded_first' scan left to
    right, then top to bottom.
    """
    if order not in INSPECTION_ORDERS:
        raise ValueError(f'Unknown inspection order {order!r}. Choose one of {INSPECTION_ORDERS}')
    if len(boxes) == 0:
        return []
    array = boxes_to_array(boxes)
    if order in ('static', 'crowded_first'):
        return sorted(range(len(boxes)), key=lambda i: (array[i, 0], array[i, 1], i))
    keys = _min_distances(array, boxes_to_array(previous))
    ranked = sorted(range(len(boxes)), key=lambda i: (keys[i], array[i, 0], array[i, 1], i))
    return ranked[::-1] if order == 'reverse' else ranked


def order_boxes(boxes: Sequence[BBox], previous: Sequence[BBox], order: str = 'dynamic') -> List[BBox]:
    """ `boxes` in inspection order, see :func:`box_order`. """
    return [boxes[i] for i in box_order(boxes, previous, order)]
