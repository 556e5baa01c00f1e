# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
CLEAR-MOT tracking quality (MOTP, MOTA), computed per camera and averaged.
"""
from __future__ import annotations
from dataclasses import asdict, dataclass, fields
from typing import Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ..geometry import BBox, DEFAULT_IOU_THRESHOLD, iou_matrix
from ..worldsim import FrameBundle, GroundTruthAnnotation

__all__ = ['FrameScore',
           'match_frame',
           'motp',
           'mota',
           'score_run',
           ]


@dataclass(frozen=True)
class FrameScore:
    """ Matching outcome of one camera frame.

    Attributes
    ----------
    camera_id: str

    timestamp_ms: float

    matches: int
        Predictions on the box of their own query object.

    iou_sum: float
        Sum of the IoU of the matches.

    fn: int
        Target objects without a prediction.

    fp: int
        Predictions overlapping no target object.

    mm: int
        Predictions on the box of another target object (identity mismatch).

    n_truth: int
        Target objects visible in the frame.
    """
    camera_id: str
    timestamp_ms: float
    matches: int = 0
    iou_sum: float = 0.
    fn: int = 0
    fp: int = 0
    mm: int = 0
    n_truth: int = 0

    @property
    def n_predictions(self) -> int:
        return self.matches + self.fp + self.mm


def match_frame(predicted: Mapping[str, BBox], truth: Sequence[GroundTruthAnnotation], camera_id: str = '',
                timestamp_ms: float = 0., threshold: float = DEFAULT_IOU_THRESHOLD) -> FrameScore:
    """ Score the predictions of one camera frame against its ground truth.

    A prediction matches when its query id equals the object id of a truth
    box overlapping it with IoU above `threshold`. Each remaining prediction
    that overlaps the truth box of another, still unmatched, target counts as
    a mismatch (MM) and consumes that truth box; all other remaining
    predictions are false positives. Truth boxes left over are false
    negatives. Thus ``predictions = matches + FP + MM`` and
    ``truths = matches + FN + MM``.

    Parameters
    ----------
    predicted: dict of query id -> BBox
        At most one box per query.

    truth: sequence of GroundTruthAnnotation
        Annotations of the target objects only.
    """
    truth = list(truth)
    truth_ids = [a.object_id for a in truth]
    if len(set(truth_ids)) != len(truth_ids):
        raise ValueError(f'Duplicate truth objects in frame of {camera_id} at t={timestamp_ms}')
    query_ids = sorted(predicted)
    overlap = iou_matrix([predicted[q] for q in query_ids], [a.box for a in truth])

    matches, iou_sum = 0, 0.
    used = np.zeros(len(truth), dtype=bool)
    remaining = []
    for i, q in enumerate(query_ids):
        j = truth_ids.index(q) if q in truth_ids else None
        if j is not None and overlap[i, j] > threshold:
            matches += 1
            iou_sum += float(overlap[i, j])
            used[j] = True
        else:
            remaining.append(i)

    mm = fp = 0
    for i in remaining:
        candidates = np.where(~used & (overlap[i] > threshold), overlap[i], -np.inf)
        if candidates.size and np.isfinite(candidates.max()):
            used[int(np.argmax(candidates))] = True
            mm += 1
        else:
            fp += 1
    return FrameScore(camera_id=camera_id, timestamp_ms=timestamp_ms, matches=matches, iou_sum=iou_sum,
                      fn=int((~used).sum()), fp=fp, mm=mm, n_truth=len(truth))


def _per_camera(scores: Iterable[FrameScore]) -> pd.DataFrame:
    columns = [f.name for f in fields(FrameScore)]
    table = pd.DataFrame([asdict(s) for s in scores], columns=columns)
    return table.groupby('camera_id', sort=True)[['matches', 'iou_sum', 'fn', 'fp', 'mm', 'n_truth']].sum()


def motp(scores: Iterable[FrameScore]) -> Optional[float]:
    """ Multi-object tracking precision.

    ``sum(IoU of matches) / matches`` per camera, averaged over the cameras
    with at least one match. None if there is no match at all.
    """
    totals = _per_camera(scores)
    totals = totals[totals['matches'] > 0]
    if totals.empty:
        return None
    return float((totals['iou_sum'] / totals['matches']).mean())


def mota(scores: Iterable[FrameScore]) -> Optional[float]:
    """ Multi-object tracking accuracy.

    ``1 - (FN + FP + MM) / T`` per camera, averaged over the cameras with
    at least one target. Not clipped, so it may be negative. None if no
    camera ever saw a target.
    """
    totals = _per_camera(scores)
    totals = totals[totals['n_truth'] > 0]
    if totals.empty:
        return None
    errors = totals['fn'] + totals['fp'] + totals['mm']
    return float((1. - errors / totals['n_truth']).mean())


def score_run(run, bundles: Sequence[FrameBundle], target_ids: Sequence[str] = None,
              threshold: float = DEFAULT_IOU_THRESHOLD) -> List[FrameScore]:
    """ Score every step of a tracking run against the ground truth of its bundles.

    Parameters
    ----------
    run: TrackingRun

    bundles: sequence of FrameBundle
        The bundles the run processed, in order.

    target_ids: sequence of str, optional
        Objects whose truth boxes count. Defaults to the query ids of the run.

    Returns
    -------
    list of FrameScore
        One per (step, camera).
    """
    bundles = list(bundles)
    if len(bundles) != len(run.steps):
        raise ValueError(f'Run has {len(run.steps)} steps, but {len(bundles)} bundles were given')
    if target_ids is None:
        target_ids = run.steps[0].assignments.keys() if run.steps else ()
    targets = set(target_ids)
    scores = []
    for step, bundle in zip(run.steps, bundles):
        for camera_id in bundle.camera_ids:
            truth = [a for a in bundle[camera_id].annotations if a.object_id in targets]
            scores.append(match_frame(step.boxes(camera_id), truth, camera_id, step.timestamp_ms, threshold))
    return scores
