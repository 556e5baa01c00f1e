# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Region-of-interest filtering across overlapping cameras.

Each frame is divided into a grid of 6 columns by 4 rows. Offline, a
greedy set cover selects few cells, over all cameras, such that every
object is inside a selected cell of some camera at every training
timestamp. Online, detections outside the selected cells are discarded.
"""
from __future__ import annotations
import logging
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple
import warnings

import numpy as np

from ..geometry import BBox, FrameGeometry
from ..scheduler import CameraProfile
from ..worldsim import CameraFrame, Detection, DetectionOracle, FrameBundle, IdentificationOracle
from .base import Query
from .baselines import ConvTracker

__all__ = ['GRID_SHAPE',
           'cell_of',
           'learn_crossroi_masks',
           'CrossRoITracker',
           ]

logger = logging.getLogger(__name__)

GRID_SHAPE = (4, 6)
"""Rows and columns of the RoI grid."""


def cell_of(box: BBox, geometry: FrameGeometry, grid: Tuple[int, int] = GRID_SHAPE) -> Tuple[int, int]:
    """ (row, column) of the grid cell holding the center of `box`. """
    n_rows, n_cols = grid
    cx, cy = box.center
    col = min(max(int(cx * n_cols / geometry.width), 0), n_cols - 1)
    row = min(max(int(cy * n_rows / geometry.height), 0), n_rows - 1)
    return row, col


def learn_crossroi_masks(bundles: Iterable[FrameBundle], object_ids: Sequence[str] = None,
                         labels: Sequence[str] = None,
                         grid: Tuple[int, int] = GRID_SHAPE) -> Dict[str, np.ndarray]:
    """ Smallest set of grid cells covering every object at every timestamp.

    Greedy set cover: repeatedly select the (camera, cell) covering most
    uncovered (object, timestamp) pairs; ties go to the lower camera id,
    then the lower row-major cell index.

    Parameters
    ----------
    bundles: iterable of FrameBundle
        Training segment with ground-truth annotations.

    object_ids: sequence of str, optional
        Objects to cover. Defaults to every annotated object. Objects that
        never appear cannot be covered; they are reported and excluded.

    labels: sequence of str, optional
        Restrict the default object set to these classes.

    grid: (rows, columns), default = (4, 6)

    Returns
    -------
    dict of camera id -> np.ndarray of bool, shape `grid`
    """
    n_rows, n_cols = grid
    coverage: Dict[Tuple[str, int], set] = {}
    cameras, seen = set(), set()
    for t, bundle in enumerate(bundles):
        for camera_id, frame in bundle.frames.items():
            cameras.add(camera_id)
            for annotation in frame.annotations:
                if labels is not None and annotation.label not in labels:
                    continue
                if object_ids is not None and annotation.object_id not in object_ids:
                    continue
                row, col = cell_of(annotation.box, frame.geometry, grid)
                coverage.setdefault((camera_id, row * n_cols + col), set()).add((annotation.object_id, t))
                seen.add(annotation.object_id)

    if object_ids is not None:
        missing = sorted(set(object_ids) - seen)
        if missing:
            warnings.warn(f'Objects {missing} never appear in the training segment and cannot be covered')

    masks = {c: np.zeros(grid, dtype=bool) for c in sorted(cameras)}
    uncovered = set().union(*coverage.values()) if coverage else set()
    candidates = sorted(coverage)
    while uncovered:
        # max() keeps the first candidate on ties, candidates are sorted by (camera, cell)
        camera_id, cell = max(candidates, key=lambda k: len(coverage[k] & uncovered))
        masks[camera_id][divmod(cell, n_cols)] = True
        uncovered -= coverage[camera_id, cell]
        candidates.remove((camera_id, cell))
    logger.info(f'Learned RoI masks with {sum(int(m.sum()) for m in masks.values())} cells '
                f'over {len(masks)} cameras')
    return masks


class CrossRoITracker(ConvTracker):
    """ Per-camera tracking restricted to learned regions of interest.

    Parameters
    ----------
    queries: sequence of Query

    profiles: dict of camera id -> CameraProfile

    detector: DetectionOracle, optional

    identifier: IdentificationOracle, optional

    masks: dict of camera id -> array of bool, shape (4, 6), optional
        Pre-trained masks. If None, :meth:`fit` learns them from its
        training bundles. Cameras without a mask keep nothing.

    verbose: int, default = 0

    Attributes
    ----------
    masks_: dict of camera id -> np.ndarray
    """
    strategy = 'crossroi'

    def __init__(self, queries: Sequence[Query] = (), profiles: Mapping[str, CameraProfile] = None,
                 detector: DetectionOracle = None, identifier: IdentificationOracle = None,
                 masks: Mapping[str, np.ndarray] = None, verbose: int = 0):
        super().__init__(queries=queries, profiles=profiles, detector=detector, identifier=identifier,
                         verbose=verbose)
        self.masks = masks

    def fit(self, bundles: Iterable[FrameBundle] = None) -> CrossRoITracker:
        """ Learn the RoI masks from a training segment, unless masks were given. """
        self._fit_common()
        if self.masks is not None:
            masks = {c: np.asarray(m, dtype=bool) for c, m in self.masks.items()}
        elif bundles is None:
            raise ValueError('CrossRoITracker needs training bundles or pre-trained masks')
        else:
            masks = learn_crossroi_masks(bundles, labels=self.labels_)
        for camera_id, mask in masks.items():
            if mask.shape != GRID_SHAPE:
                raise ValueError(f'RoI mask of {camera_id} must have shape {GRID_SHAPE}. Got {mask.shape}')
        self.masks_ = {c: masks.get(c, np.zeros(GRID_SHAPE, dtype=bool)) for c in self.cameras_}
        return self

    def _active_cameras(self, bundle: FrameBundle) -> List[str]:
        return [c for c in self._check_cameras(bundle) if self.masks_[c].any()]

    def _filter(self, frame: CameraFrame, detections: List[Detection]) -> List[Detection]:
        mask = self.masks_[frame.camera_id]
        return [d for d in detections if mask[cell_of(d.box, frame.geometry)]]
