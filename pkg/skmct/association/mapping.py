# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Spatial association: a table of multi-camera box tuples.

Cameras with fixed fields of view see an object at a given physical
position always at the same boxes. A mapping entry records these boxes
(or ABSENT where the object was not visible) once the object has been
identified on several cameras. Later, the boxes found on the inspected
cameras select an entry, which predicts where the object appears on the
remaining cameras, or that it does not appear there at all.
"""
from __future__ import annotations
from dataclasses import dataclass, field
import logging
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union
import warnings

import numpy as np
import pandas as pd

from ..exceptions import ConfigurationError
from ..geometry import BBox, DEFAULT_IOU_THRESHOLD, iou_matrix
from ..utils.check import check_open_interval, check_positive_int

__all__ = ['ABSENT',
           'SKIP_CAMERA',
           'Expect',
           'MappingEntry',
           'MappingTable',
           'predict_slots',
           'SNAPSHOT_COLUMNS',
           ]

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ['entry_id', 'camera_id', 'x_min', 'y_min', 'x_max', 'y_max', 'score', 'created_ms']
_ABSENT_MARK = 'ABSENT'


class _Marker:
    __slots__ = ('_name', )

    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name

    def __reduce__(self):
        return self._name


ABSENT = _Marker('ABSENT')
"""Slot value of a camera that does not see the object."""

SKIP_CAMERA = _Marker('SKIP_CAMERA')
"""Prediction that a camera does not see the object."""


@dataclass(frozen=True)
class Expect:
    """ Prediction that a camera sees the object at `box`. """
    box: BBox


Slot = Union[BBox, _Marker]


@dataclass
class MappingEntry:
    """ Boxes of one object at one instant on every camera.

    Attributes
    ----------
    entry_id: int

    slots: dict of camera id -> BBox or ABSENT
        Exactly one slot per configured camera.

    scores: dict of camera id -> float
        Identity-matching score of each present slot.

    created_ms: float

    hit_count: int
        Number of successful lookups.

    identity: str, optional
        Query id the entry was recorded for.
    """
    entry_id: int
    slots: Dict[str, Slot]
    scores: Dict[str, float] = field(default_factory=dict)
    created_ms: float = 0.
    hit_count: int = 0
    identity: Optional[str] = None

    @property
    def present_cameras(self) -> Tuple[str, ...]:
        return tuple(c for c, s in self.slots.items() if s is not ABSENT)

    @property
    def n_present(self) -> int:
        return len(self.present_cameras)

    @property
    def mean_score(self) -> float:
        present = self.present_cameras
        if not present:
            return 0.
        return float(np.mean([self.scores.get(c, 0.) for c in present]))


def predict_slots(entry: MappingEntry, remaining: Sequence[str]) -> Dict[str, Union[Expect, _Marker]]:
    """ Predict the object on the cameras not inspected yet.

    Returns
    -------
    dict of camera id -> Expect or SKIP_CAMERA
        Expect(box) where the entry holds a box, SKIP_CAMERA where it holds ABSENT.
    """
    prediction = {}
    for camera_id in remaining:
        slot = entry.slots[camera_id]
        prediction[camera_id] = SKIP_CAMERA if slot is ABSENT else Expect(slot)
    return prediction


class MappingTable:
    """ Hash table of mapping entries with overlap pruning.

    Parameters
    ----------
    cameras: sequence of str
        Camera ids. Every entry holds one slot per camera.

    capacity: int, default = 100
        Pruning runs whenever an insert lets the table grow beyond this size.

    prune_threshold: float, default = 0.7
        Two entries overlap when they share at least one present camera and
        their boxes exceed this IoU on every shared camera.

    match_threshold: float, default = 0.5
        IoU above which an observed box matches an entry slot.

    Notes
    -----
    Entry boxes are frozen at creation; reuse increments the hit count only.
    """

    def __init__(self, cameras: Sequence[str], capacity: int = 100,
                 prune_threshold: float = 0.7, match_threshold: float = DEFAULT_IOU_THRESHOLD):
        self.cameras = tuple(sorted(set(cameras)))
        if len(self.cameras) < 2:
            raise ValueError(f'Spatial association needs at least two cameras. Got {list(self.cameras)}')
        self.capacity = check_positive_int(capacity, 'capacity')
        self.prune_threshold = check_open_interval(prune_threshold, 0., 1., 'prune_threshold')
        self.match_threshold = check_open_interval(match_threshold, 0., 1., 'match_threshold')
        self._index = {c: k for k, c in enumerate(self.cameras)}
        self._entries: Dict[int, MappingEntry] = {}
        self._next_id = 0
        self._cache = None

    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[MappingEntry]:
        return iter(self._entries.values())

    def __contains__(self, entry_id) -> bool:
        return entry_id in self._entries

    def __getitem__(self, entry_id) -> MappingEntry:
        return self._entries[entry_id]

    def _arrays(self):
        """ Entry ids, boxes (n, n_cameras, 4) with NaN for ABSENT, and the presence mask. """
        if self._cache is None:
            ids = np.fromiter(self._entries.keys(), dtype=np.int64, count=len(self._entries))
            boxes = np.full((len(ids), len(self.cameras), 4), np.nan)
            for i, entry in enumerate(self._entries.values()):
                for camera_id, slot in entry.slots.items():
                    if slot is not ABSENT:
                        boxes[i, self._index[camera_id]] = slot.to_array()
            present = ~np.isnan(boxes[:, :, 0])
            self._cache = ids, boxes, present
        return self._cache

    def _normalize_slots(self, boxes: Mapping[str, Slot]) -> Dict[str, Slot]:
        unknown = set(boxes) - set(self.cameras)
        if unknown:
            raise ValueError(f'Unknown cameras {sorted(unknown)}. Configured cameras are {list(self.cameras)}')
        slots = {}
        for camera_id in self.cameras:
            slot = boxes.get(camera_id, ABSENT)
            if slot is not ABSENT and not isinstance(slot, BBox):
                raise TypeError(f'Slot of camera {camera_id} must be a BBox or ABSENT. Got {slot!r}')
            slots[camera_id] = slot
        return slots

    def _insert(self, entry: MappingEntry):
        self._entries[entry.entry_id] = entry
        self._next_id = max(self._next_id, entry.entry_id + 1)
        self._cache = None

    def _remove(self, entry_ids):
        for entry_id in entry_ids:
            del self._entries[entry_id]
        self._cache = None

    def record_association(self, identity: Optional[str], boxes: Mapping[str, Slot],
                           scores: Mapping[str, float] = None, t: float = 0.) -> Optional[int]:
        """ Store the boxes of an object identified on several cameras.

        Parameters
        ----------
        identity: str or None
            Query id of the object.

        boxes: dict of camera id -> BBox or ABSENT
            Cameras missing from the dict are ABSENT.

        scores: dict of camera id -> float, optional
            Identity-matching score per present slot. Defaults to 1.

        t: float
            Creation timestamp, ms.

        Returns
        -------
        entry_id: int or None
            None when the association was rejected for lack of present slots.
        """
        slots = self._normalize_slots(boxes)
        present = [c for c, s in slots.items() if s is not ABSENT]
        if len(present) < 2:
            warnings.warn(f'Association of {identity} at t={t} ms rejected: '
                          f'{len(present)} present slot(s), at least 2 required.')
            return None
        scores = {} if scores is None else scores
        entry = MappingEntry(entry_id=self._next_id,
                             slots=slots,
                             scores={c: float(scores.get(c, 1.)) for c in present},
                             created_ms=float(t),
                             identity=identity)
        self._insert(entry)
        if len(self) > self.capacity:
            self.prune_entries()
        return entry.entry_id

    def _candidates(self, observed: Mapping[str, Slot]) -> List[Tuple[float, MappingEntry]]:
        """ Entries agreeing with `observed`, with their mean IoU, best first. """
        if not self._entries:
            return []
        ids, boxes, present = self._arrays()
        agree = np.ones(len(ids), dtype=bool)
        iou_sum = np.zeros(len(ids))
        n_boxes = 0
        for camera_id, slot in observed.items():
            k = self._index[camera_id]
            if slot is ABSENT:
                agree &= ~present[:, k]
                continue
            overlap = iou_matrix(boxes[:, k], [slot])[:, 0]
            agree &= present[:, k] & (overlap > self.match_threshold)
            iou_sum += overlap
            n_boxes += 1
        if n_boxes == 0:
            return []
        candidates = [(iou_sum[i] / n_boxes, self._entries[int(ids[i])]) for i in np.flatnonzero(agree)]
        candidates.sort(key=lambda c: (-c[0], -c[1].hit_count, -c[1].created_ms, c[1].entry_id))
        return candidates

    def match(self, observed: Mapping[str, Slot]) -> Optional[MappingEntry]:
        """ Best entry agreeing with `observed`, without counting a hit.

        Cameras missing from `observed` are not inspected and match any
        slot. Box slots agree when IoU exceeds the match threshold, ABSENT
        agrees only with ABSENT. Ties are broken by higher mean IoU, then
        higher hit count, then newer creation, then lower entry id. At least
        one observed box is required.
        """
        unknown = set(observed) - set(self.cameras)
        if unknown:
            raise ValueError(f'Unknown cameras {sorted(unknown)}')
        candidates = self._candidates(observed)
        return candidates[0][1] if candidates else None

    def lookup_entry(self, observed: Mapping[str, Slot]) -> Optional[MappingEntry]:
        """ As :meth:`match`, and increment the hit count of the returned entry. """
        entry = self.match(observed)
        if entry is not None:
            entry.hit_count += 1
        return entry

    def predict_slots(self, entry: MappingEntry, remaining: Sequence[str]):
        return predict_slots(entry, remaining)

    def _overlapping(self, a: int, b: int, boxes: np.ndarray, present: np.ndarray) -> bool:
        shared = present[a] & present[b]
        if not shared.any():
            return False
        overlap = [iou_matrix(boxes[a, k], boxes[b, k])[0, 0] for k in np.flatnonzero(shared)]
        return min(overlap) > self.prune_threshold

    def prune_entries(self) -> int:
        """ Non-maximum suppression over entries, then capacity eviction.

        Entries are visited by priority: more present slots first, then higher
        mean identity-matching score, then lower entry id. An entry
        overlapping any kept entry is removed. If the table still exceeds its
        capacity, the entries with the lowest hit count (then oldest, then
        lowest id) are evicted.

        Returns
        -------
        n_pruned: int
        """
        if not self._entries:
            return 0
        ids, boxes, present = self._arrays()
        rows = {int(entry_id): i for i, entry_id in enumerate(ids)}
        order = sorted(self._entries.values(), key=lambda e: (-e.n_present, -e.mean_score, e.entry_id))
        kept, removed = [], []
        for entry in order:
            row = rows[entry.entry_id]
            if any(self._overlapping(row, rows[other.entry_id], boxes, present) for other in kept):
                removed.append(entry.entry_id)
            else:
                kept.append(entry)
        self._remove(removed)
        n_suppressed = len(removed)

        excess = len(self) - self.capacity
        if excess > 0:
            victims = sorted(self._entries.values(), key=lambda e: (e.hit_count, e.created_ms, e.entry_id))[:excess]
            self._remove([e.entry_id for e in victims])
            removed.extend(e.entry_id for e in victims)
        if removed:
            logger.debug(f'Pruned {n_suppressed} overlapping and evicted {len(removed) - n_suppressed} '
                         f'mapping entries, {len(self)} remain')
        return len(removed)

    def interpolate_occlusion(self, camera_id: str, t: float, last_box: BBox,
                              other_detections: Mapping[str, Sequence[BBox]]) -> Optional[Dict[str, BBox]]:
        """ Confirm a short occlusion of an object missing on `camera_id`.

        Searches the entries whose slot on `camera_id` matches the box of the
        previous frame. The first such entry (by the tie order of
        :meth:`match`) whose boxes on all its other present cameras are found
        among the current detections confirms the occlusion.

        Parameters
        ----------
        camera_id: str
            Camera on which the object disappeared.

        t: float
            Current timestamp, ms. Only used for logging.

        last_box: BBox
            Box of the object on `camera_id` in the previous frame.

        other_detections: dict of camera id -> list of BBox
            Current detections of the other inspected cameras. A camera
            missing from the dict has no detections.

        Returns
        -------
        dict of camera id -> BBox, or None
            The entry's boxes on the other cameras.
        """
        for _, entry in self._candidates({camera_id: last_box}):
            expected = {c: entry.slots[c] for c in entry.present_cameras if c != camera_id}
            found = all(np.any(iou_matrix([box], other_detections.get(c, []))[0] > self.match_threshold)
                        for c, box in expected.items())
            if found:
                logger.debug(f'Occlusion on {camera_id} at t={t} ms confirmed by entry {entry.entry_id}')
                return expected
        return None

    def save(self, path) -> int:
        """ Write a snapshot CSV, one row per slot. Returns the number of entries.

        Columns are ``entry_id,camera_id,x_min,y_min,x_max,y_max,score,created_ms``.
        An ABSENT slot is written as ``ABSENT`` in ``x_min`` with empty
        ``y_min``, ``x_max``, ``y_max`` and ``score`` fields, e.g.
        ``0,cam2,ABSENT,,,,,100.0``.
        """
        rows = []
        for entry in self._entries.values():
            for camera_id, slot in entry.slots.items():
                if slot is ABSENT:
                    rows.append((entry.entry_id, camera_id, _ABSENT_MARK, '', '', '', '', entry.created_ms))
                else:
                    rows.append((entry.entry_id, camera_id, slot.x_min, slot.y_min, slot.x_max, slot.y_max,
                                 entry.scores.get(camera_id, 0.), entry.created_ms))
        pd.DataFrame(rows, columns=SNAPSHOT_COLUMNS).to_csv(path, index=False, encoding='utf-8')
        logger.info(f'Saved {len(self)} mapping entries to {path}')
        return len(self)

    @classmethod
    def load(cls, path, cameras: Sequence[str] = None, **kwargs) -> MappingTable:
        """ Read a snapshot written by :meth:`save`.

        Cameras default to those found in the file. Entries beyond the
        capacity are pruned. A slot row is either a box, or ``ABSENT`` in
        ``x_min`` with the other box and score fields empty.
        """
        try:
            table = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ConfigurationError(f'cannot read mapping snapshot {path}: {e}', field='mapping_snapshot') from e
        missing = [c for c in SNAPSHOT_COLUMNS if c not in table.columns]
        if missing:
            raise ConfigurationError(f'snapshot lacks columns {missing}', field='mapping_snapshot')
        if cameras is None:
            cameras = sorted(table['camera_id'].unique())
        mapping = cls(cameras, **kwargs)
        for entry_id, rows in table.groupby('entry_id', sort=False):
            slots, scores = {}, {}
            try:
                for row in rows.itertuples(index=False):
                    if row.x_min == _ABSENT_MARK:
                        if any((row.y_min, row.x_max, row.y_max, row.score)):
                            raise ValueError(f'ABSENT slot of {row.camera_id} carries box or score fields')
                        slots[row.camera_id] = ABSENT
                    else:
                        slots[row.camera_id] = BBox(row.x_min, row.y_min, row.x_max, row.y_max)
                        scores[row.camera_id] = float(row.score)
                entry = MappingEntry(entry_id=int(entry_id),
                                     slots=mapping._normalize_slots(slots),
                                     scores=scores,
                                     created_ms=float(rows['created_ms'].iloc[0]))
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f'invalid snapshot entry {entry_id}: {e}', field='mapping_snapshot') from e
            if entry.n_present < 2:
                warnings.warn(f'Snapshot entry {entry_id} has fewer than 2 present slots and is skipped.')
                continue
            mapping._insert(entry)
        if len(mapping) > mapping.capacity:
            mapping.prune_entries()
        logger.info(f'Loaded {len(mapping)} mapping entries from {path}')
        return mapping
