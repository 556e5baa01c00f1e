# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import math

import numpy as np
import pytest

from skmct.exceptions import ConfigurationError
from skmct.scheduler import (CameraProfile, PROFILE_PRESETS, batched_latency, ewma_update, load_profile_preset,
                             load_profiles, save_profiles, transmission_delay)


@pytest.mark.parametrize('name', sorted(PROFILE_PRESETS))
def test_presets_select_batch_size_four(name):
    assert load_profile_preset(name, 'cam0').n_batch == 4


def test_batched_latency_with_jetson_nx_vehicle():
    profile = load_profile_preset('jetson-nx-vehicle', 'cam0')
    assert batched_latency(profile, 4) == 0.399
    assert batched_latency(profile, 8) == 0.798
    assert batched_latency(profile, 0) == 0.
    assert batched_latency(profile, 1) == 0.399


def test_batched_latency_is_non_decreasing():
    profile = load_profile_preset('jetson-agx-person', 'cam0')
    latencies = [batched_latency(profile, n) for n in range(30)]
    assert latencies == sorted(latencies)


def test_transmission_delay():
    source = load_profile_preset('jetson-nx-vehicle', 'cam0', peers=['cam1'], bandwidth=1e9)
    target = load_profile_preset('jetson-nx-vehicle', 'cam1', peers=['cam0'], bandwidth=1e9)
    delay = transmission_delay(source, target, 1)
    np.testing.assert_allclose(delay, 128 * 128 * 3 * 8 / 1e9)
    assert abs(delay - 0.3e-3) <= 0.15e-3
    np.testing.assert_allclose(transmission_delay(source, target, 5), 5 * delay)
    assert transmission_delay(source, source, 10) == 0.
    assert transmission_delay(source, target, 0) == 0.


def test_transmission_to_unknown_peer():
    source = load_profile_preset('jetson-nx-vehicle', 'cam0')
    target = load_profile_preset('jetson-nx-vehicle', 'cam7')
    with pytest.raises(ValueError, match='cam7'):
        transmission_delay(source, target, 1)
    assert source.bandwidth_to('cam0') == math.inf


def test_ewma_update():
    assert ewma_update(100., 200., 1.) == 200.
    np.testing.assert_allclose(ewma_update(100., 200., 0.3), 130.)
    estimate = 5.
    for _ in range(200):
        estimate = ewma_update(estimate, 2., 0.3)
    np.testing.assert_allclose(estimate, 2.)
    with pytest.raises(ValueError):
        ewma_update(1., 2., 0.)


def test_ewma_stays_within_observed_range():
    rng = np.random.RandomState(0)
    observations = rng.uniform(3., 9., size=100)
    estimate = 5.
    for value in observations:
        estimate = ewma_update(estimate, value, 0.3)
        assert min(observations.min(), 5.) - 1e-12 <= estimate <= max(observations.max(), 5.) + 1e-12


def test_profile_tracks_observations():
    profile = load_profile_preset('jetson-nx-vehicle', 'cam0', peers=['cam1'], bandwidth=1e9)
    np.testing.assert_allclose(profile.observe_inference(0.499), 0.3 * 0.499 + 0.7 * 0.399)
    np.testing.assert_allclose(profile.observe_transfer('cam1', 5e8, 1.), 0.3 * 5e8 + 0.7 * 1e9)
    # The table stays as profiled
    assert profile.id_latency[4] == 0.399


def test_batch_size_ties_go_to_smaller_batch():
    profile = CameraProfile('cam0', detection_latency={'1280x720': 0.05}, id_latency={1: 0.1, 2: 0.2})
    assert profile.n_batch == 1
    assert profile.detection_time() == 0.05


@pytest.mark.parametrize('kwargs', [dict(id_latency={1: 0.2, 2: 0.1}),
                                    dict(id_latency={}),
                                    dict(id_latency={1: 0.}),
                                    dict(beta=0.),
                                    dict(bandwidth={'cam1': -1.}),
                                    ])
def test_invalid_profile(kwargs):
    params = dict(camera_id='cam0', detection_latency={'1280x720': 0.05}, id_latency={1: 0.1})
    params.update(kwargs)
    with pytest.raises(ConfigurationError):
        CameraProfile(**params)


def test_unknown_preset_is_named():
    with pytest.raises(ConfigurationError, match='jetson-tx2'):
        load_profile_preset('jetson-tx2', 'cam0')


def test_detection_time_by_resolution():
    profile = load_profile_preset('jetson-agx-vehicle', 'cam0', resolution='1920x1080')
    assert profile.detection_time() == 0.084
    assert profile.detection_time('1280x720') == 0.038
    with pytest.raises(ValueError):
        profile.detection_time('640x480')


def test_profile_file(tmp_path):
    profiles = {c: load_profile_preset('jetson-nx-person', c, peers=['cam0', 'cam1'], resolution='1280x720')
                for c in ['cam0', 'cam1']}
    path = tmp_path / 'profiles.json'
    save_profiles(profiles, path)
    loaded = load_profiles(path)
    assert sorted(loaded) == ['cam0', 'cam1']
    assert loaded['cam1'].id_latency == profiles['cam1'].id_latency
    assert loaded['cam1'].bandwidth == {'cam0': 1e9}
    assert loaded['cam0'].crop_shape == (128, 128, 3)
