# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import math

import numpy as np
import pytest

from skmct.scheduler import (CameraProfile, batched_latency, load_profile_preset, plan_distribution,
                             transmission_delay)

BATCHES = [1, 2, 4, 8]


def _compositions(n, k):
    if k == 1:
        yield (n, )
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first, ) + rest


def _random_profiles(rng, n_cameras):
    ids = [f'cam{j}' for j in range(n_cameras)]
    profiles = {}
    for camera_id in ids:
        latency = np.sort(rng.uniform(0.01, 0.5, size=len(BATCHES)))
        bandwidth = {p: rng.uniform(1e7, 1e9) for p in ids if p != camera_id}
        profiles[camera_id] = CameraProfile(camera_id, detection_latency={'1280x720': 0.05},
                                            id_latency=dict(zip(BATCHES, latency)), bandwidth=bandwidth)
    return profiles


def _brute_force(host, n, profiles):
    cameras = [host] + sorted(c for c in profiles if c != host)
    best = math.inf
    for split in _compositions(n, len(cameras)):
        span = max(transmission_delay(profiles[host], profiles[c], m) + batched_latency(profiles[c], m)
                   for c, m in zip(cameras, split))
        best = min(best, span)
    return best


def _identical(camera_ids, latency=0.4, bandwidth=math.inf):
    return {c: CameraProfile(c, detection_latency={'1280x720': 0.05}, id_latency={4: latency},
                             bandwidth={p: bandwidth for p in camera_ids if p != c})
            for c in camera_ids}


def test_plan_is_optimal():
    rng = np.random.RandomState(42)
    for _ in range(200):
        profiles = _random_profiles(rng, rng.randint(1, 5))
        host = sorted(profiles)[rng.randint(len(profiles))]
        for n in range(13):
            plan = plan_distribution(host, n, profiles)
            assert plan.makespan == _brute_force(host, n, profiles)
            assert plan.n_crops == n
            assert plan.makespan == max([plan.transmission[c] + plan.processing[c] for c in plan.assignment]
                                        + [0.])


def test_fast_host_keeps_small_batches():
    profiles = {'cam0': load_profile_preset('jetson-agx-vehicle', 'cam0', peers=['cam1']),
                'cam1': load_profile_preset('jetson-nx-vehicle', 'cam1', peers=['cam0'])}
    for n in range(1, 5):
        plan = plan_distribution('cam0', n, profiles)
        assert plan.assignment == {'cam0': n, 'cam1': 0}
        assert plan.makespan == batched_latency(profiles['cam0'], n)


def test_split_between_identical_cameras():
    plan = plan_distribution('cam0', 8, _identical(['cam0', 'cam1']))
    assert plan.assignment == {'cam0': 4, 'cam1': 4}
    np.testing.assert_allclose(plan.makespan, 0.4)
    assert plan.n_remote == 4


def test_ties_favor_the_host_then_lower_ids():
    profiles = _identical(['cam0', 'cam1', 'cam2'])
    assert plan_distribution('cam1', 2, profiles).assignment == {'cam1': 2, 'cam0': 0, 'cam2': 0}
    assert plan_distribution('cam2', 12, profiles).assignment == {'cam2': 4, 'cam0': 4, 'cam1': 4}


def test_empty_plan():
    plan = plan_distribution('cam0', 0, _identical(['cam0', 'cam1']))
    assert plan.makespan == 0.
    assert plan.n_crops == 0


def test_candidates_restrict_the_plan():
    plan = plan_distribution('cam0', 8, _identical(['cam0', 'cam1']), candidates=['cam0'])
    assert plan.assignment == {'cam0': 8}


def test_invalid_requests():
    profiles = _identical(['cam0', 'cam1'])
    with pytest.raises(ValueError):
        plan_distribution('cam0', -1, profiles)
    with pytest.raises(ValueError):
        plan_distribution('cam5', 3, profiles)
