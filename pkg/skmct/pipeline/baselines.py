# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Trackers that identify every candidate box independently on each camera.
"""
from __future__ import annotations
import logging
from typing import List, Mapping, Sequence

from sklearn.utils.validation import check_is_fitted

from ..scheduler import CameraProfile, batched_latency
from ..worldsim import CameraFrame, Detection, DetectionOracle, FrameBundle, IdentificationOracle
from .base import Assignment, IdentificationMode, LedgerRow, Query, StepResult, TrackerBase

__all__ = ['ConvTracker',
           'SpatulaTracker',
           ]

logger = logging.getLogger(__name__)


class ConvTracker(TrackerBase):
    """ Per-camera tracking without cross-camera collaboration.

    Every camera runs detection, then identification of every detection of
    a query class, batched on its own hardware. Cameras work in parallel, so
    a step takes as long as its slowest camera.

    Parameters
    ----------
    queries: sequence of Query

    profiles: dict of camera id -> CameraProfile

    detector: DetectionOracle, optional
        Defaults to a noiseless detector.

    identifier: IdentificationOracle, optional
        Defaults to a noiseless identifier.

    verbose: int, default = 0
        If verbose > 0, show a progress bar in :meth:`run`.
    """
    strategy = 'conv'

    def __init__(self, queries: Sequence[Query] = (), profiles: Mapping[str, CameraProfile] = None,
                 detector: DetectionOracle = None, identifier: IdentificationOracle = None, verbose: int = 0):
        super().__init__(queries=queries, profiles=profiles, detector=detector, identifier=identifier,
                         verbose=verbose)

    def _active_cameras(self, bundle: FrameBundle) -> List[str]:
        return self._check_cameras(bundle)

    def _filter(self, frame: CameraFrame, detections: List[Detection]) -> List[Detection]:
        return detections

    def step(self, bundle: FrameBundle) -> StepResult:
        """ Detect and identify on every active camera of the bundle. """
        check_is_fitted(self, 'cameras_')
        calls_before = self.identifier_.n_calls_
        assignments = self._empty_assignments()
        active = self._active_cameras(bundle)
        ids, spans, detect_times = {c: 0 for c in bundle.camera_ids}, [], []
        for camera_id in active:
            frame = bundle[camera_id]
            profile = self.profiles_[camera_id]
            detections = self._filter(frame, self._label_matching(self.detector_.detect(frame)))
            candidates = []
            for i, detection in enumerate(detections):
                query_id, score = self._decide(self._identify(detection), detection.label)
                candidates.append((i, query_id, score))
            for query_id, (i, score) in self._bind(candidates).items():
                assignments[query_id][camera_id] = Assignment(query_id, camera_id, detections[i].box,
                                                              IdentificationMode.FEATURE_MATCH, score)
            ids[camera_id] = len(detections)
            detect_time = profile.detection_time(frame.geometry.resolution)
            detect_times.append(detect_time)
            spans.append(detect_time + batched_latency(profile, len(detections)))

        row = LedgerRow(timestamp_ms=bundle.timestamp_ms,
                        ids=ids,
                        n_detections=len(active),
                        phases=(max(spans),) if spans else (),
                        detect_latency_s=max(detect_times, default=0.))
        self._check_conservation(row, calls_before)
        return StepResult(bundle.timestamp_ms, assignments, row)


class SpatulaTracker(ConvTracker):
    """ Per-camera tracking restricted to cameras that currently see a query object.

    Camera selection uses the ground-truth presence of the bundle, i.e. an
    ideal camera filter. Cameras without any query object skip detection too.
    """
    strategy = 'spatula'

    def __init__(self, queries: Sequence[Query] = (), profiles: Mapping[str, CameraProfile] = None,
                 detector: DetectionOracle = None, identifier: IdentificationOracle = None, verbose: int = 0):
        super().__init__(queries=queries, profiles=profiles, detector=detector, identifier=identifier,
                         verbose=verbose)

    def _active_cameras(self, bundle: FrameBundle) -> List[str]:
        cameras = self._check_cameras(bundle)
        wanted = {q.query_id for q in self.queries_}
        present = bundle.present_objects()
        active = [c for c in cameras if present[c] & wanted]
        if len(active) < len(cameras):
            logger.debug(f'Spatula skips cameras {sorted(set(cameras) - set(active))} '
                         f'at t={bundle.timestamp_ms} ms')
        return active
