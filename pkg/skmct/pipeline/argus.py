# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Multi-camera tracking with cross-camera collaboration.

Cameras are inspected one after the other. Whatever is learned on the
first cameras (where the queries are, and the spatial layout of earlier
observations) lets later cameras skip identification, or skip the camera
altogether. Within a camera, boxes overlapping a cached box reuse the
cached identity for a bounded number of frames.
"""
from __future__ import annotations
from dataclasses import dataclass
import logging
import math
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
from sklearn.utils.validation import check_is_fitted

from ..association import ABSENT, SKIP_CAMERA, Expect, MappingTable, TemporalCache, TemporalCacheRecord, predict_slots
from ..geometry import BBox, DEFAULT_IOU_THRESHOLD, boxes_match, iou_matrix, touches_edge
from ..scheduler import (INSPECTION_ORDERS, CameraProfile, DistributionPlan, InspectionState,
                         box_order, order_cameras, plan_distribution)
from ..utils.check import check_positive_int
from ..utils.seeding import derive_random_state
from ..worldsim import DetectionOracle, FrameBundle, IdentificationOracle
from .base import Assignment, IdentificationMode, LedgerRow, Query, StepResult, TrackerBase

__all__ = ['ArgusTracker',
           'ASSOCIATIONS',
           'MAPPING_MODES',
           ]

logger = logging.getLogger(__name__)

ASSOCIATIONS = ('spatio_temporal', 'spatial')
MAPPING_MODES = ('online', 'offline')


@dataclass
class _Resolution:
    identity: Optional[str]
    score: float
    mode: IdentificationMode
    reference: Optional[int] = None
    feature: Optional[np.ndarray] = None
    record: Optional[TemporalCacheRecord] = None


class ArgusTracker(TrackerBase):
    """ Multi-camera tracker exploiting spatio-temporal association.

    Parameters
    ----------
    queries: sequence of Query

    profiles: dict of camera id -> CameraProfile
        One profile per camera. The head camera is the one with the
        highest identification throughput.

    detector: DetectionOracle, optional
        Defaults to a noiseless detector.

    identifier: IdentificationOracle, optional
        Defaults to a noiseless identifier.

    alpha: float, default = 0.5
        Camera priority weight of the found-target ratio against the target size.

    inspection_order: {'dynamic', 'static', 'reverse', 'crowded_first'}, default = 'dynamic'
        Order of cameras and boxes, see :func:`skmct.scheduler.order_cameras`.

    association: {'spatio_temporal', 'spatial'}, default = 'spatio_temporal'
        'spatial' disables identity reuse across frames.

    distribute: bool, default = True
        Offload identification batches to other cameras when this shortens
        the round. If False, every camera identifies its own crops.

    refresh_interval: int, default = 20
        An object is identified again at least once per this many frames,
        however often its identity could have been reused.

    cache_threshold: float, default = 0.5
        IoU above which a box matches a box of the previous frame.

    entry_threshold: float, default = 0.5
        IoU above which a box matches a mapping entry slot.

    prune_threshold: float, default = 0.7
        IoU on all shared cameras above which two mapping entries are duplicates.

    capacity: int, default = 100
        Maximum number of mapping entries.

    round_size: int, optional
        Crops identified per round. Defaults to the inspected camera's
        profiled batch size. Inspection of a camera stops after the round
        in which the last pending query was found.

    mapping: {'online', 'offline'}, default = 'online'
        'offline' fills the mapping table from the ground truth of the
        training bundles passed to :meth:`fit`, assuming ideal identification.
        'online' learns the table while tracking.

    mapping_snapshot: str or path, optional
        Snapshot file to preload the mapping table from.

    latency_jitter: float, default = 0
        Relative standard deviation of the simulated actual latencies that
        feed the EWMA estimates of the profiles.

    seed: int, default = 0
        Seed of the latency fluctuation.

    verbose: int, default = 0
        If verbose > 0, show a progress bar in :meth:`run`.

    Attributes
    ----------
    head_: str
        Head camera.

    cache_: TemporalCache

    mapping_: MappingTable or None
        None with a single camera.

    profiles_: dict of camera id -> CameraProfile
        Profiles with the current latency and bandwidth estimates.
    """
    strategy = 'argus'

    def __init__(self, queries: Sequence[Query] = (), profiles: Mapping[str, CameraProfile] = None,
                 detector: DetectionOracle = None, identifier: IdentificationOracle = None,
                 alpha: float = 0.5, inspection_order: str = 'dynamic', association: str = 'spatio_temporal',
                 distribute: bool = True, refresh_interval: int = 20,
                 cache_threshold: float = DEFAULT_IOU_THRESHOLD, entry_threshold: float = DEFAULT_IOU_THRESHOLD,
                 prune_threshold: float = 0.7, capacity: int = 100, round_size: int = None,
                 mapping: str = 'online', mapping_snapshot=None, latency_jitter: float = 0.,
                 seed: int = 0, verbose: int = 0):
        super().__init__(queries=queries, profiles=profiles, detector=detector, identifier=identifier,
                         verbose=verbose)
        self.alpha = alpha
        self.inspection_order = inspection_order
        self.association = association
        self.distribute = distribute
        self.refresh_interval = refresh_interval
        self.cache_threshold = cache_threshold
        self.entry_threshold = entry_threshold
        self.prune_threshold = prune_threshold
        self.capacity = capacity
        self.round_size = round_size
        self.mapping = mapping
        self.mapping_snapshot = mapping_snapshot
        self.latency_jitter = latency_jitter
        self.seed = seed

    def _check_params(self):
        if self.inspection_order not in INSPECTION_ORDERS:
            raise ValueError(f'Unknown inspection order {self.inspection_order!r}. '
                             f'Choose one of {INSPECTION_ORDERS}')
        if self.association not in ASSOCIATIONS:
            raise ValueError(f'Unknown association {self.association!r}. Choose one of {ASSOCIATIONS}')
        if self.mapping not in MAPPING_MODES:
            raise ValueError(f'Unknown mapping mode {self.mapping!r}. Choose one of {MAPPING_MODES}')
        check_positive_int(self.refresh_interval, 'refresh_interval')
        if self.round_size is not None:
            check_positive_int(self.round_size, 'round_size')
        if self.latency_jitter < 0:
            raise ValueError(f'latency_jitter must be non-negative. Got {self.latency_jitter}')

    def fit(self, bundles: Iterable[FrameBundle] = None) -> ArgusTracker:
        """ Reset the tracking state and prepare the mapping table.

        Parameters
        ----------
        bundles: iterable of FrameBundle, optional
            Training segment, required for ``mapping='offline'``.
        """
        self._check_params()
        self._fit_common()
        self.head_ = min(self.cameras_, key=lambda c: (-self.profiles_[c].throughput, c))
        self.cache_ = TemporalCache(refresh_limit=self.refresh_interval - 1, match_threshold=self.cache_threshold)
        self.state_ = InspectionState(n_queries=len(self.queries_), alpha=self.alpha)
        self.random_state_ = derive_random_state(self.seed, 'latency')
        self.previous_: Dict[str, Dict[str, Assignment]] = {}

        table_kwargs = dict(capacity=self.capacity, prune_threshold=self.prune_threshold,
                            match_threshold=self.entry_threshold)
        if len(self.cameras_) < 2:
            self.mapping_ = None
        elif self.mapping_snapshot is not None:
            self.mapping_ = MappingTable.load(self.mapping_snapshot, cameras=self.cameras_, **table_kwargs)
        else:
            self.mapping_ = MappingTable(self.cameras_, **table_kwargs)
        if self.mapping == 'offline':
            if bundles is None:
                raise ValueError("mapping='offline' requires training bundles")
            if self.mapping_ is not None:
                self._learn_mapping(bundles)
        logger.info(f'Argus ready: {len(self.cameras_)} cameras, head {self.head_}, '
                    f'{0 if self.mapping_ is None else len(self.mapping_)} mapping entries')
        return self

    def _learn_mapping(self, bundles: Iterable[FrameBundle]):
        """ Record the ground-truth boxes of every object visible on at least two cameras. """
        query_ids = {q.query_id for q in self.queries_}
        visible = self.detector_.occlusion_threshold
        n_recorded = 0
        for bundle in bundles:
            if set(bundle.camera_ids) != set(self.cameras_):
                continue
            per_object: Dict[str, Dict[str, BBox]] = {}
            for camera_id, frame in bundle.frames.items():
                for annotation in frame.annotations:
                    if annotation.label in self.labels_ and annotation.visibility >= visible:
                        per_object.setdefault(annotation.object_id, {})[camera_id] = annotation.box
            for object_id, boxes in sorted(per_object.items()):
                if len(boxes) < 2:
                    continue
                slots = {c: boxes.get(c, ABSENT) for c in self.cameras_}
                if self.mapping_.match(slots) is not None:
                    continue
                identity = object_id if object_id in query_ids else None
                if self.mapping_.record_association(identity, slots, t=bundle.timestamp_ms) is not None:
                    n_recorded += 1
        logger.info(f'Learned {n_recorded} mapping entries offline, {len(self.mapping_)} kept')

    def _fluctuate(self, value: float) -> float:
        if self.latency_jitter == 0:
            return value
        return value * max(1. + self.latency_jitter * self.random_state_.normal(), 0.1)

    def _observe(self, plan: DistributionPlan):
        """ Feed the simulated actual latencies of an executed plan into the estimates. """
        host = self.profiles_[plan.host]
        for camera_id, n in plan.assignment.items():
            if n == 0:
                continue
            estimate, truth = self.profiles_[camera_id], self.profiles[camera_id]
            for _ in range(math.ceil(n / estimate.n_batch)):
                estimate.observe_inference(self._fluctuate(truth.id_latency[estimate.n_batch]))
            if camera_id != plan.host:
                n_bits = n * host.crop_bits
                seconds = self._fluctuate(n_bits / self.profiles[plan.host].bandwidth_to(camera_id))
                host.observe_transfer(camera_id, n_bits, seconds)

    def _plan(self, camera_id: str, n: int) -> DistributionPlan:
        candidates = self.cameras_ if self.distribute else [camera_id]
        return plan_distribution(camera_id, n, self.profiles_, candidates=candidates)

    def step(self, bundle: FrameBundle) -> StepResult:
        """ Track the queries in one bundle.

        Returns
        -------
        StepResult
            Assignments per query and camera, and the cost ledger row.
        """
        check_is_fitted(self, 'cache_')
        calls_before = self.identifier_.n_calls_
        t = bundle.timestamp_ms
        cameras = self._check_cameras(bundle)
        for camera_id in cameras:
            self.state_.frame_area[camera_id] = bundle[camera_id].geometry.area
        if self.queries_:
            order = order_cameras(self.state_, cameras, self.inspection_order)
        else:
            order = sorted(cameras)

        query_ids = [q.query_id for q in self.queries_]
        found = self._empty_assignments()
        observed = {q: {} for q in query_ids}
        predictions = {q: {} for q in query_ids}
        predicted = set()
        ids = {c: 0 for c in cameras}
        detected: Dict[str, List[BBox]] = {}
        detect_times, phases = [], []
        crops_tx = bytes_tx = 0

        for position, camera_id in enumerate(order):
            frame = bundle[camera_id]
            profile = self.profiles_[camera_id]
            pending = [q for q in query_ids if predictions[q].get(camera_id, (None, None))[0] is not SKIP_CAMERA]
            if not pending:
                logger.debug(f'Skipping {camera_id} at t={t} ms: no query expected')
                for q in query_ids:
                    observed[q][camera_id] = ABSENT
                continue

            detections = self._label_matching(self.detector_.detect(frame))
            boxes = [d.box for d in detections]
            detected[camera_id] = boxes
            frame_index = frame.frame_index
            ranked = box_order(boxes, self.state_.boxes.get(camera_id, []), self.inspection_order)
            matches = self.cache_.match(camera_id, boxes, frame_index)

            # Boxes at the frame edge without a known identity are still entering
            newcomers = [i for i in ranked if touches_edge(boxes[i], frame.geometry)
                         and (i not in matches or matches[i].identity is None)]

            # Temporal association
            resolved: Dict[int, _Resolution] = {}
            forced = set()
            if self.association == 'spatio_temporal':
                for i, record in matches.items():
                    if i in newcomers:
                        continue
                    if self.cache_.refresh_due(record):
                        forced.add(i)
                    else:
                        resolved[i] = _Resolution(record.identity, record.score, IdentificationMode.TEMPORAL_ASSOC,
                                                  record.record_id, record=record)

            # Spatial association
            claimed = set(resolved) | forced | set(newcomers)
            for q in pending:
                prediction, entry_id = predictions[q].get(camera_id, (None, None))
                if not isinstance(prediction, Expect) or any(r.identity == q for r in resolved.values()):
                    continue
                if self.cache_.skip_count(camera_id, q, frame_index) >= self.cache_.refresh_limit:
                    continue
                free = [i for i in ranked if i not in claimed]
                if not free:
                    continue
                overlap = iou_matrix([prediction.box], [boxes[i] for i in free])[0]
                best = int(np.argmax(overlap))
                if overlap[best] > self.mapping_.match_threshold:
                    i = free[best]
                    score = self.mapping_[entry_id].scores.get(camera_id, 0.) if entry_id in self.mapping_ else 0.
                    resolved[i] = _Resolution(q, score, IdentificationMode.SPATIAL_ASSOC, entry_id,
                                              record=matches.get(i))
                    claimed.add(i)

            detect_times.append(profile.detection_time(frame.geometry.resolution))

            # Boxes entering the frame are always identified, in one round of their own
            queue = [i for i in ranked if i not in resolved and i not in newcomers]
            batches = [newcomers] if newcomers else []
            round_size = self.round_size or profile.n_batch
            while batches or (queue and any(q not in {r.identity for r in resolved.values()} for q in pending)):
                if batches:
                    batch = batches.pop()
                else:
                    batch, queue = queue[:round_size], queue[round_size:]
                plan = self._plan(camera_id, len(batch))
                for i in batch:
                    feature = self._identify(detections[i])
                    identity, score = self._decide(feature, detections[i].label)
                    resolved[i] = _Resolution(identity, score, IdentificationMode.FEATURE_MATCH, feature=feature,
                                              record=matches.get(i))
                ids[camera_id] += len(batch)
                phases.append(plan.makespan)
                crops_tx += plan.n_remote
                bytes_tx += plan.n_remote * profile.crop_bits // 8
                self._observe(plan)

            # One box per query, then slide the cache forward
            bound = self._bind([(i, resolved[i].identity, resolved[i].score) for i in ranked if i in resolved])
            winners = {i: q for q, (i, _) in bound.items()}
            for i in ranked:
                if i not in resolved:
                    continue
                r = resolved[i]
                identity = r.identity if winners.get(i) == r.identity else None
                self.cache_.update(camera_id, boxes[i], r.feature, identity, frame_index,
                                   was_skip=r.mode is not IdentificationMode.FEATURE_MATCH,
                                   score=r.score, record=r.record)
            for q, (i, score) in bound.items():
                r = resolved[i]
                found[q][camera_id] = Assignment(q, camera_id, boxes[i], r.mode, score, r.reference)
            for q in query_ids:
                observed[q][camera_id] = found[q][camera_id].box if camera_id in found[q] else ABSENT

            # Predict the remaining cameras from the boxes observed so far
            if self.mapping_ is not None:
                remaining = order[position + 1:]
                for q in query_ids:
                    if camera_id not in found[q] or q in predicted:
                        continue
                    entry = self.mapping_.lookup_entry(observed[q])
                    if entry is None:
                        continue
                    predicted.add(q)
                    for c, prediction in predict_slots(entry, remaining).items():
                        predictions[q][c] = (prediction, entry.entry_id)

        self._interpolate_occlusions(t, found, detected)
        self._record_associations(t, cameras, found)

        for camera_id in cameras:
            targets = [a.box for a in (found[q].get(camera_id) for q in query_ids)
                       if a is not None and a.mode is not IdentificationMode.OCCLUSION_INTERP]
            self.state_.update(camera_id, targets, len(detected.get(camera_id, [])))
            self.cache_.expire(camera_id, bundle[camera_id].frame_index + 1)
        self.previous_ = {q: dict(per_camera) for q, per_camera in found.items()}

        row = LedgerRow(timestamp_ms=t,
                        ids=ids,
                        n_detections=len(detected),
                        phases=((max(detect_times),) if detect_times else ()) + tuple(phases),
                        detect_latency_s=max(detect_times, default=0.),
                        crops_tx=crops_tx,
                        bytes_tx=bytes_tx)
        self._check_conservation(row, calls_before)
        logger.debug(f'Argus t={t} ms: {row.n_ids} identifications, {len(detected)}/{len(cameras)} cameras '
                     f'detected, latency {row.latency_s:.3f} s')
        return StepResult(t, found, row)

    def _interpolate_occlusions(self, t: float, found: Dict[str, Dict[str, Assignment]],
                                detected: Mapping[str, List[BBox]]):
        """ Bridge a query that vanished from one camera while the others still see it where expected. """
        if self.mapping_ is None:
            return
        bridged = []
        for q, per_camera in found.items():
            for camera_id, last in self.previous_.get(q, {}).items():
                if camera_id in per_camera or camera_id not in detected:
                    continue
                # Only one frame is bridged
                if last.mode is IdentificationMode.OCCLUSION_INTERP:
                    continue
                others = {c: boxes for c, boxes in detected.items() if c != camera_id}
                expected = self.mapping_.interpolate_occlusion(camera_id, t, last.box, others)
                if not expected:
                    continue
                confirmed = any(c in per_camera and boxes_match(per_camera[c].box, box, self.mapping_.match_threshold)
                                for c, box in expected.items())
                if confirmed:
                    bridged.append(Assignment(q, camera_id, last.box, IdentificationMode.OCCLUSION_INTERP,
                                              last.similarity))
        for a in bridged:
            found[a.query_id][a.camera_id] = a

    def _record_associations(self, t: float, cameras: Sequence[str], found: Dict[str, Dict[str, Assignment]]):
        """ Store the boxes of queries found on several cameras that no entry explains yet. """
        if self.mapping_ is None or set(cameras) != set(self.cameras_):
            return
        for q, per_camera in found.items():
            present = {c: a for c, a in per_camera.items() if a.mode is not IdentificationMode.OCCLUSION_INTERP}
            if len(present) < 2:
                continue
            slots = {c: present[c].box if c in present else ABSENT for c in self.cameras_}
            if self.mapping_.match(slots) is not None:
                continue
            self.mapping_.record_association(q, slots, {c: a.similarity for c, a in present.items()}, t)
