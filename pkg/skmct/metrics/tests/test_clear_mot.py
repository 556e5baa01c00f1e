# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import numpy as np
import pytest

from skmct.geometry import BBox, FrameGeometry
from skmct.metrics import FrameScore, match_frame, mota, motp, score_run, summarize
from skmct.pipeline import (Assignment, CostLedger, IdentificationMode, LedgerRow, StepResult,
                            TrackingRun)
from skmct.worldsim import CameraFrame, FrameBundle, GroundTruthAnnotation

TRUTH_BOX = BBox(0, 0, 10, 10)
OTHER_BOX = BBox(100, 100, 110, 110)


def _truth(object_id, box, camera_id='cam0', t=0.):
    return GroundTruthAnnotation(t, camera_id, object_id, box)


def test_single_match():
    score = match_frame({'q0': BBox(0, 0, 10, 8)}, [_truth('q0', TRUTH_BOX)])
    assert (score.matches, score.fn, score.fp, score.mm) == (1, 0, 0, 0)
    np.testing.assert_allclose(score.iou_sum, 0.8)
    np.testing.assert_allclose(motp([score]), 0.8)
    assert mota([score]) == 1.


def test_prediction_without_truth_is_false_positive():
    score = match_frame({'q0': OTHER_BOX}, [_truth('q0', TRUTH_BOX)])
    assert (score.matches, score.fn, score.fp, score.mm) == (0, 1, 1, 0)


def test_prediction_on_other_identity_is_mismatch():
    score = match_frame({'q0': TRUTH_BOX}, [_truth('q1', TRUTH_BOX)])
    assert (score.matches, score.fn, score.fp, score.mm) == (0, 0, 0, 1)


def test_swapped_identities():
    truth = [_truth('q0', TRUTH_BOX), _truth('q1', OTHER_BOX)]
    score = match_frame({'q0': OTHER_BOX, 'q1': TRUTH_BOX}, truth)
    assert (score.matches, score.fn, score.fp, score.mm) == (0, 0, 0, 2)


def test_low_overlap_does_not_match():
    # IoU 0.5 exactly is not above the gate
    score = match_frame({'q0': BBox(0, 0, 10, 5)}, [_truth('q0', TRUTH_BOX)])
    assert (score.matches, score.fn, score.fp) == (0, 1, 1)


@pytest.mark.parametrize('predicted, truth', [
    ({}, []),
    ({'q0': TRUTH_BOX}, []),
    ({}, [_truth('q0', TRUTH_BOX)]),
    ({'q0': TRUTH_BOX, 'q1': BBox(1, 1, 10, 10), 'q2': OTHER_BOX},
     [_truth('q0', TRUTH_BOX), _truth('q1', BBox(50, 50, 60, 60)), _truth('q3', OTHER_BOX)]),
])
def test_counts_are_balanced(predicted, truth):
    score = match_frame(predicted, truth)
    assert score.n_predictions == len(predicted)
    assert score.matches + score.fn + score.mm == score.n_truth == len(truth)


def test_duplicate_truth_is_rejected():
    with pytest.raises(ValueError):
        match_frame({}, [_truth('q0', TRUTH_BOX), _truth('q0', OTHER_BOX)])


def test_motp_mean_of_matches():
    scores = [match_frame({'q0': BBox(0, 0, 10, 6)}, [_truth('q0', TRUTH_BOX)], 'cam0', 0.),
              match_frame({'q0': BBox(0, 0, 10, 8)}, [_truth('q0', TRUTH_BOX)], 'cam0', 100.)]
    np.testing.assert_allclose(motp(scores), 0.7)


def test_mota_formula():
    # T=10, FN=1, FP=1, MM=0
    scores = [FrameScore('cam0', 100. * t, matches=1, iou_sum=1., n_truth=1) for t in range(8)]
    scores.append(FrameScore('cam0', 800., fn=1, n_truth=1))
    scores.append(FrameScore('cam0', 900., matches=1, iou_sum=1., fp=1, n_truth=1))
    np.testing.assert_allclose(mota(scores), 0.8)


def test_mota_is_not_clipped():
    scores = [FrameScore('cam0', 0., fn=1, fp=3, n_truth=1)]
    np.testing.assert_allclose(mota(scores), -3.)


def test_cameras_without_denominator_are_excluded():
    scores = [FrameScore('cam0', 0., matches=1, iou_sum=0.9, n_truth=1),
              FrameScore('cam1', 0., fp=2)]
    np.testing.assert_allclose(motp(scores), 0.9)
    np.testing.assert_allclose(mota(scores), 1.)
    assert motp([FrameScore('cam1', 0., fp=2)]) is None
    assert mota([FrameScore('cam1', 0., fp=2)]) is None
    assert motp([]) is None
    assert mota([]) is None


def test_mota_invariant_under_camera_relabeling():
    scores = [FrameScore('cam0', 0., matches=2, iou_sum=1.5, fn=1, n_truth=3),
              FrameScore('cam1', 0., matches=1, iou_sum=0.6, fp=1, n_truth=1)]
    relabeled = [FrameScore({'cam0': 'x', 'cam1': 'a'}[s.camera_id], s.timestamp_ms, s.matches, s.iou_sum,
                            s.fn, s.fp, s.mm, s.n_truth) for s in scores]
    np.testing.assert_allclose(mota(scores), mota(relabeled))
    np.testing.assert_allclose(motp(scores), motp(relabeled))


def _two_camera_run():
    """ Two frames on two cameras: per-camera MOTP 0.6 and 0.8. """
    geometry = FrameGeometry(200, 200)
    predictions = {'cam0': BBox(0, 0, 10, 6), 'cam1': BBox(0, 0, 10, 8)}
    run, bundles = TrackingRun('constructed'), []
    for t in (0., 100.):
        frames = {c: CameraFrame(c, int(t // 100), t, geometry, (_truth('q0', TRUTH_BOX, c, t),))
                  for c in predictions}
        bundles.append(FrameBundle(t, frames))
        assignments = {'q0': {c: Assignment('q0', c, box, IdentificationMode.FEATURE_MATCH, 0.9)
                              for c, box in predictions.items()}}
        run.add(StepResult(t, assignments, LedgerRow(t, ids={'cam0': 1, 'cam1': 1}, n_detections=2,
                                                     phases=(0.1, 0.05), detect_latency_s=0.1,
                                                     crops_tx=1, bytes_tx=49152)))
    return run, bundles


def test_score_run_per_camera_average():
    run, bundles = _two_camera_run()
    scores = score_run(run, bundles)
    assert len(scores) == 4
    np.testing.assert_allclose(motp(scores), 0.7)
    assert mota(scores) == 1.


def test_score_run_length_mismatch():
    run, bundles = _two_camera_run()
    with pytest.raises(ValueError):
        score_run(run, bundles[:1])


def test_summarize_run():
    run, bundles = _two_camera_run()
    report = summarize(run.ledger, score_run(run, bundles), strategy='constructed', scenario='toy', seed=3)
    assert report.n_steps == 2
    assert report.mean_ids == 2.
    assert report.max_ids == 2
    assert report.total_ids == 4
    np.testing.assert_allclose(report.mean_latency_s, 0.15)
    np.testing.assert_allclose(report.detect_latency_s, 0.1)
    np.testing.assert_allclose(report.id_latency_s, 0.05)
    np.testing.assert_allclose(report.motp, 0.7)
    assert report.crops_tx == 2
    assert report.bytes_tx == 98304
    assert list(report.row()) == ['strategy', 'scenario', 'seed', 'mean_ids', 'mean_latency_s',
                                  'detect_latency_s', 'id_latency_s', 'motp', 'mota', 'crops_tx']


def test_summarize_mean_ids():
    ledger = CostLedger([LedgerRow(0., ids={'cam0': 10}), LedgerRow(100., ids={'cam0': 6, 'cam1': 8})])
    report = summarize(ledger)
    assert report.mean_ids == 12.
    assert report.max_ids == 14


def test_summarize_empty_run():
    report = summarize(CostLedger())
    assert report.n_steps == 0
    assert report.mean_ids == 0.
    assert report.mean_latency_s == 0.
    assert report.motp is None
    assert report.mota is None
