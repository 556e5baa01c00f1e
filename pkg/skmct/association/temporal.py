# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass
from itertools import count
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..geometry import BBox, DEFAULT_IOU_THRESHOLD, iou_matrix
from ..utils.check import check_non_negative_int, check_open_interval

__all__ = ['TemporalCacheRecord',
           'TemporalCache',
           ]

logger = logging.getLogger(__name__)


@dataclass
class TemporalCacheRecord:
    """ Last known position, feature and identity decision of an object on one camera.

    Attributes
    ----------
    camera_id: str

    box: BBox
        Position in the frame of `last_update`.

    feature: np.ndarray or None
        Identification feature. None for objects resolved without running
        the identification model.

    identity: str or None
        Query id, or None for anonymous (non-query) objects.

    last_update: int
        Frame index of the last update. The record serves lookups at
        ``last_update + 1`` only.

    skip_count: int
        Consecutive frames the record was reused instead of re-identified.

    score: float
        Similarity behind the identity decision.

    record_id: int
    """
    camera_id: str
    box: BBox
    feature: Optional[np.ndarray]
    identity: Optional[str]
    last_update: int
    skip_count: int = 0
    score: float = 0.
    record_id: int = 0

    def valid_at(self, frame_index: int) -> bool:
        return self.last_update == frame_index - 1


class TemporalCache:
    """ Per-camera cache of identification results, slid forward frame by frame.

    Parameters
    ----------
    refresh_limit: int, default = 19
        Maximum number of consecutive skips. A record that has been reused
        this many times is not returned by :meth:`lookup`, so the object is
        identified again. With a limit of ``R - 1`` every object is
        re-identified once per R frames.

    match_threshold: float, default = 0.5
        IoU above which a box matches a cached box.
    """

    def __init__(self, refresh_limit: int = 19, match_threshold: float = DEFAULT_IOU_THRESHOLD):
        self.refresh_limit = check_non_negative_int(refresh_limit, 'refresh_limit')
        self.match_threshold = check_open_interval(match_threshold, 0., 1., 'match_threshold')
        self._records: Dict[str, List[TemporalCacheRecord]] = {}
        self._ids = count()

    def __len__(self):
        return sum(len(records) for records in self._records.values())

    def records(self, camera_id: str) -> List[TemporalCacheRecord]:
        return list(self._records.get(camera_id, []))

    def refresh_due(self, record: TemporalCacheRecord) -> bool:
        """ Whether reusing `record` once more would exceed the refresh limit. """
        return record.skip_count >= self.refresh_limit

    def _valid(self, camera_id: str, frame_index: int) -> List[TemporalCacheRecord]:
        return [r for r in self._records.get(camera_id, []) if r.valid_at(frame_index)]

    def lookup(self, camera_id: str, box: BBox, frame_index: int) -> Optional[TemporalCacheRecord]:
        """ Unexpired record whose box matches `box`, or None.

        Among several matching records the one with the highest IoU is
        returned. A record due for refresh is never returned.
        """
        valid = self._valid(camera_id, frame_index)
        if not valid:
            return None
        overlap = iou_matrix([box], [r.box for r in valid])[0]
        best = int(np.argmax(overlap))
        if overlap[best] <= self.match_threshold:
            return None
        record = valid[best]
        if self.refresh_due(record):
            logger.debug(f'Record {record.record_id} on {camera_id} reached the refresh limit')
            return None
        return record

    def match(self, camera_id: str, boxes: Sequence[BBox], frame_index: int) -> Dict[int, TemporalCacheRecord]:
        """ One-to-one matching of `boxes` against the unexpired records of a camera.

        Pairs are accepted greedily by decreasing IoU. Unlike :meth:`lookup`,
        records due for refresh are matched too; callers check
        :meth:`refresh_due`.

        Returns
        -------
        dict of box index -> TemporalCacheRecord
        """
        valid = self._valid(camera_id, frame_index)
        if not valid or len(boxes) == 0:
            return {}
        overlap = iou_matrix(boxes, [r.box for r in valid])
        matches = {}
        used = set()
        # Stable order on ties: box index, then record order
        for flat in np.argsort(-overlap, axis=None, kind='stable'):
            i, j = np.unravel_index(flat, overlap.shape)
            if overlap[i, j] <= self.match_threshold:
                break
            if i in matches or j in used:
                continue
            matches[int(i)] = valid[j]
            used.add(j)
        return matches

    def update(self, camera_id: str, box: BBox, feature: Optional[np.ndarray], identity: Optional[str],
               frame_index: int, was_skip: bool, score: float = 0.,
               record: TemporalCacheRecord = None) -> TemporalCacheRecord:
        """ Upsert the record of an object observed at `frame_index`.

        The record to slide forward is, in order: `record` if given; the
        record holding the same identity; for anonymous objects, an
        unexpired anonymous record matching `box`. Otherwise a new record is
        created. The skip count grows by one when `was_skip`, and restarts
        at 0 after an identification.
        """
        records = self._records.setdefault(camera_id, [])
        if record is None and identity is not None:
            record = next((r for r in records if r.identity == identity and r.last_update >= frame_index - 1), None)
        if record is None and identity is None:
            candidates = [r for r in records if r.identity is None and r.valid_at(frame_index)]
            if candidates:
                overlap = iou_matrix([box], [r.box for r in candidates])[0]
                best = int(np.argmax(overlap))
                if overlap[best] > self.match_threshold:
                    record = candidates[best]
        if record is None:
            record = TemporalCacheRecord(camera_id=camera_id, box=box, feature=feature, identity=identity,
                                         last_update=frame_index, skip_count=1 if was_skip else 0,
                                         score=score, record_id=next(self._ids))
            records.append(record)
        else:
            record.skip_count = record.skip_count + 1 if was_skip else 0
            record.box = box
            record.identity = identity
            record.last_update = frame_index
            record.score = score
            if feature is not None:
                record.feature = feature
        # One record per identity and camera
        if identity is not None:
            self._records[camera_id] = [r for r in records if r is record or r.identity != identity]
        return record

    def skip_count(self, camera_id: str, identity: str, frame_index: int) -> int:
        """ Skip count of the record holding `identity`, 0 if there is none. """
        for r in self._records.get(camera_id, []):
            if r.identity == identity and r.last_update >= frame_index - 1:
                return r.skip_count
        return 0

    def expire(self, camera_id: str, frame_index: int) -> int:
        """ Drop records that can no longer serve lookups from `frame_index` on. Returns the number dropped. """
        records = self._records.get(camera_id, [])
        kept = [r for r in records if r.last_update >= frame_index - 1]
        self._records[camera_id] = kept
        return len(records) - len(kept)

    def clear(self):
        self._records.clear()
