# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from abc import ABC, abstractmethod
import copy
from dataclasses import dataclass, field
from enum import Enum
import logging
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple
import warnings

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted
from tqdm.auto import tqdm

from ..exceptions import InvariantViolation
from ..geometry import BBox
from ..scheduler import CameraProfile
from ..utils.check import check_open_interval, check_unit_vector
from ..worldsim import Detection, DetectionOracle, FrameBundle, IdentificationOracle

__all__ = ['Query',
           'IdentificationMode',
           'Assignment',
           'StepResult',
           'LedgerRow',
           'CostLedger',
           'TrackletElement',
           'Tracklet',
           'TrackingRun',
           'TrackerBase',
           'make_queries',
           ]

logger = logging.getLogger(__name__)

DEFAULT_TAU = 0.8


@dataclass(frozen=True, eq=False)
class Query:
    """ An object to track.

    Parameters
    ----------
    query_id: str
        Identity reported in assignments and tracklets.

    label: str
        Object class; only detections of this class are compared to the query.

    feature: array-like, shape (dim, )
        Unit-norm identification feature of the query image.

    tau: float, default = 0.8
        Cosine similarity at or above which a crop is accepted as the query.
    """
    query_id: str
    label: str
    feature: np.ndarray
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        feature = check_unit_vector(self.feature, f'feature of query {self.query_id}').copy()
        feature.setflags(write=False)
        object.__setattr__(self, 'feature', feature)
        check_open_interval(self.tau, -1., 1., 'tau')


def make_queries(object_ids: Sequence[str], identifier: IdentificationOracle, labels: Mapping[str, str],
                 tau: float = DEFAULT_TAU) -> List[Query]:
    """ Queries for objects of a world, with their clean reference features.

    Reference features come from the query images and are not booked as
    identification operations.
    """
    queries = []
    for object_id in object_ids:
        if object_id not in labels:
            raise ValueError(f'Unknown query object {object_id}')
        queries.append(Query(query_id=str(object_id), label=labels[object_id],
                             feature=identifier.ground_embedding(object_id), tau=tau))
    return queries


class IdentificationMode(str, Enum):
    """ How the identity of an assigned box was established. """
    FEATURE_MATCH = 'FEATURE_MATCH'
    SPATIAL_ASSOC = 'SPATIAL_ASSOC'
    TEMPORAL_ASSOC = 'TEMPORAL_ASSOC'
    OCCLUSION_INTERP = 'OCCLUSION_INTERP'


@dataclass(frozen=True)
class Assignment:
    """ A query found on one camera at one timestamp.

    `reference` is the mapping entry id for SPATIAL_ASSOC, the cache record
    id for TEMPORAL_ASSOC, and None otherwise.
    """
    query_id: str
    camera_id: str
    box: BBox
    mode: IdentificationMode
    similarity: float = 0.
    reference: Optional[int] = None


@dataclass
class StepResult:
    """ Output of one tracker step.

    Attributes
    ----------
    timestamp_ms: float

    assignments: dict of query id -> dict of camera id -> Assignment
        Every query has a (possibly empty) dict.

    row: LedgerRow
        Costs of the step.
    """
    timestamp_ms: float
    assignments: Dict[str, Dict[str, Assignment]]
    row: LedgerRow

    def identities(self, modes: Iterable[IdentificationMode] = None) -> Dict[Tuple[str, str], BBox]:
        """ Flat (query id, camera id) -> box view, optionally restricted to some modes. """
        modes = None if modes is None else set(modes)
        return {(q, c): a.box
                for q, per_camera in self.assignments.items()
                for c, a in per_camera.items()
                if modes is None or a.mode in modes}

    def boxes(self, camera_id: str) -> Dict[str, BBox]:
        """ Predicted box per query on one camera. """
        return {q: per_camera[camera_id].box
                for q, per_camera in self.assignments.items() if camera_id in per_camera}


@dataclass(frozen=True)
class LedgerRow:
    """ Costs of one timestamp.

    Attributes
    ----------
    timestamp_ms: float

    ids: dict of camera id -> int
        Identification operations charged to each camera's boxes.

    n_detections: int
        Detector invocations.

    phases: tuple of float
        Sequential phases of the simulated timeline, seconds. The first is
        the parallel detection phase, the rest are identification rounds.

    detect_latency_s: float
        Slowest detector among the cameras that ran detection, seconds.

    crops_tx: int
        Crops sent to another camera.

    bytes_tx: int
    """
    timestamp_ms: float
    ids: Dict[str, int] = field(default_factory=dict)
    n_detections: int = 0
    phases: Tuple[float, ...] = ()
    detect_latency_s: float = 0.
    crops_tx: int = 0
    bytes_tx: int = 0

    @property
    def n_ids(self) -> int:
        return sum(self.ids.values())

    @property
    def latency_s(self) -> float:
        """ Simulated end-to-end latency, the sum of the phases. """
        return float(sum(self.phases))

    @property
    def id_latency_s(self) -> float:
        return self.latency_s - self.detect_latency_s


class CostLedger:
    """ Append-only record of per-timestamp costs. """

    BASE_COLUMNS = ['timestamp_ms', 'n_ids', 'n_detections', 'detect_latency_s', 'id_latency_s',
                    'latency_s', 'n_phases', 'crops_tx', 'bytes_tx']

    def __init__(self, rows: Iterable[LedgerRow] = ()):
        self._rows: List[LedgerRow] = list(rows)

    def append(self, row: LedgerRow):
        self._rows.append(row)

    def __len__(self):
        return len(self._rows)

    def __iter__(self) -> Iterator[LedgerRow]:
        return iter(self._rows)

    def __getitem__(self, index) -> LedgerRow:
        return self._rows[index]

    @property
    def total_ids(self) -> int:
        return sum(row.n_ids for row in self._rows)

    def to_frame(self) -> pd.DataFrame:
        """ One row per timestamp, plus an ``ids_<camera>`` column per camera. """
        cameras = sorted({c for row in self._rows for c in row.ids})
        records = []
        for row in self._rows:
            record = {'timestamp_ms': row.timestamp_ms,
                      'n_ids': row.n_ids,
                      'n_detections': row.n_detections,
                      'detect_latency_s': row.detect_latency_s,
                      'id_latency_s': row.id_latency_s,
                      'latency_s': row.latency_s,
                      'n_phases': len(row.phases),
                      'crops_tx': row.crops_tx,
                      'bytes_tx': row.bytes_tx}
            record.update({f'ids_{c}': row.ids.get(c, 0) for c in cameras})
            records.append(record)
        return pd.DataFrame(records, columns=self.BASE_COLUMNS + [f'ids_{c}' for c in cameras])


@dataclass(frozen=True)
class TrackletElement:
    timestamp_ms: float
    camera_id: str
    box: BBox
    mode: IdentificationMode
    reference: Optional[int] = None


@dataclass
class Tracklet:
    """ Boxes of one query over time and cameras. """
    query_id: str
    elements: List[TrackletElement] = field(default_factory=list)

    def append(self, element: TrackletElement):
        last = next((e for e in reversed(self.elements) if e.camera_id == element.camera_id), None)
        if last is not None and not element.timestamp_ms > last.timestamp_ms:
            raise ValueError(f'Tracklet of {self.query_id} on {element.camera_id}: timestamp '
                             f'{element.timestamp_ms} does not follow {last.timestamp_ms}')
        if element.mode in (IdentificationMode.SPATIAL_ASSOC, IdentificationMode.TEMPORAL_ASSOC) \
                and element.reference is None:
            raise ValueError(f'{element.mode.value} element of {self.query_id} lacks a reference')
        self.elements.append(element)

    def __len__(self):
        return len(self.elements)


@dataclass
class TrackingRun:
    """ Results of a tracker over a timeline. """
    strategy: str
    steps: List[StepResult] = field(default_factory=list)
    ledger: CostLedger = field(default_factory=CostLedger)
    tracklets: Dict[str, Tracklet] = field(default_factory=dict)

    TRACKLET_COLUMNS = ['query_id', 'timestamp_ms', 'camera_id', 'x_min', 'y_min', 'x_max', 'y_max',
                        'mode', 'reference']

    def add(self, result: StepResult):
        self.steps.append(result)
        self.ledger.append(result.row)
        for query_id, per_camera in result.assignments.items():
            tracklet = self.tracklets.setdefault(query_id, Tracklet(query_id))
            for camera_id in sorted(per_camera):
                a = per_camera[camera_id]
                tracklet.append(TrackletElement(result.timestamp_ms, camera_id, a.box, a.mode, a.reference))

    def tracklets_frame(self) -> pd.DataFrame:
        """ Flat tracklet table, one row per element. """
        rows = []
        for query_id in sorted(self.tracklets):
            for e in self.tracklets[query_id].elements:
                rows.append((query_id, e.timestamp_ms, e.camera_id, e.box.x_min, e.box.y_min, e.box.x_max,
                             e.box.y_max, e.mode.value, '' if e.reference is None else e.reference))
        return pd.DataFrame(rows, columns=self.TRACKLET_COLUMNS)


class TrackerBase(BaseEstimator, ABC):
    """ Base class for multi-camera trackers.

    Trackers are configured by their constructor, prepared by :meth:`fit`,
    and then process one FrameBundle per :meth:`step`. The detection and
    identification oracles are shared with the caller: the number of their
    invocations is what a tracker is measured by.
    """

    strategy = None

    @abstractmethod
    def __init__(self, queries: Sequence[Query] = (), profiles: Mapping[str, CameraProfile] = None,
                 detector: DetectionOracle = None, identifier: IdentificationOracle = None, verbose: int = 0):
        self.queries = queries
        self.profiles = profiles
        self.detector = detector
        self.identifier = identifier
        self.verbose = verbose

    @abstractmethod
    def step(self, bundle: FrameBundle) -> StepResult:
        pass  # pragma: no cover

    def _fit_common(self):
        queries = list(self.queries)
        ids = [q.query_id for q in queries]
        if len(set(ids)) != len(ids):
            raise ValueError(f'Query ids must be unique. Got {ids}')
        if not queries:
            warnings.warn(f'{type(self).__name__} has no queries; nothing will be identified.')
        if not self.profiles:
            raise ValueError('At least one camera profile is required')
        self.queries_ = queries
        self.profiles_: Dict[str, CameraProfile] = copy.deepcopy(dict(self.profiles))
        self.cameras_ = sorted(self.profiles_)
        self.detector_ = self.detector if self.detector is not None else DetectionOracle()
        self.identifier_ = self.identifier if self.identifier is not None else IdentificationOracle()
        self.labels_ = sorted({q.label for q in queries})
        if queries:
            self.query_features_ = np.vstack([q.feature for q in queries])
        else:
            self.query_features_ = np.empty((0, 0))
        self.query_labels_ = np.array([q.label for q in queries], dtype=object)
        self.query_taus_ = np.array([q.tau for q in queries], dtype=float)

    def fit(self, bundles: Iterable[FrameBundle] = None) -> TrackerBase:
        """ Prepare the tracker. `bundles` is a training segment, unused by default. """
        self._fit_common()
        return self

    def _check_cameras(self, bundle: FrameBundle) -> List[str]:
        unknown = [c for c in bundle.camera_ids if c not in self.profiles_]
        if unknown:
            raise ValueError(f'No profile for cameras {unknown}')
        return list(bundle.camera_ids)

    def _label_matching(self, detections: Sequence[Detection]) -> List[Detection]:
        return [d for d in detections if d.label in self.labels_]

    def _identify(self, detection: Detection) -> np.ndarray:
        return self.identifier_.extract(detection.crop_id, detection.box, detection.camera_id,
                                        detection.frame_index)

    def _decide(self, feature: np.ndarray, label: str) -> Tuple[Optional[str], float]:
        """ Best-scoring query of the detection's class, if its similarity reaches the query's tau.

        Returns the query id (or None) and the best similarity among the
        queries of that class.
        """
        eligible = np.flatnonzero(self.query_labels_ == label)
        if eligible.size == 0:
            return None, -1.
        scores = self.query_features_[eligible] @ feature
        accepted = scores >= self.query_taus_[eligible]
        if not accepted.any():
            return None, float(scores.max())
        # argmax keeps the first query on ties
        best = int(np.argmax(np.where(accepted, scores, -np.inf)))
        return self.queries_[eligible[best]].query_id, float(scores[best])

    @staticmethod
    def _bind(candidates: Sequence[Tuple[int, str, float]]) -> Dict[str, Tuple[int, float]]:
        """ One box per query: highest similarity wins, earlier candidates on ties.

        Parameters
        ----------
        candidates: sequence of (box index, query id, similarity)
            In inspection order.

        Returns
        -------
        dict of query id -> (box index, similarity)
        """
        bound = {}
        for i, query_id, score in candidates:
            if query_id is None:
                continue
            if query_id not in bound or score > bound[query_id][1]:
                bound[query_id] = (i, score)
        return bound

    def _check_conservation(self, row: LedgerRow, calls_before: int):
        n_calls = self.identifier_.n_calls_ - calls_before
        if n_calls != row.n_ids:
            raise InvariantViolation(f'{type(self).__name__} booked {row.n_ids} identifications at '
                                     f't={row.timestamp_ms} ms, but the identifier ran {n_calls} times')

    def _empty_assignments(self) -> Dict[str, Dict[str, Assignment]]:
        return {q.query_id: {} for q in self.queries_}

    def run(self, bundles: Iterable[FrameBundle]) -> TrackingRun:
        """ Process a timeline of bundles.

        Returns
        -------
        TrackingRun
            Step results, cost ledger and tracklets.
        """
        check_is_fitted(self, 'cameras_')
        result = TrackingRun(strategy=self.strategy or type(self).__name__)
        if self.verbose:
            bundles = tqdm(bundles, desc=f'{result.strategy} tracking')
        for bundle in bundles:
            result.add(self.step(bundle))
        logger.info(f'{result.strategy}: {len(result.ledger)} steps, {result.ledger.total_ids} identifications')
        return result
