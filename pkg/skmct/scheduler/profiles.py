# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Compute profiles of the cameras: detection latency, identification
latency per batch size, and bandwidth towards the other cameras.

The built-in presets hold latencies measured on Jetson Xavier NX and AGX
boards for a vehicle and a person re-identification model.
"""
from __future__ import annotations
from dataclasses import dataclass, field
import json
import logging
import math
from typing import Dict, Mapping, Optional, Sequence, Tuple

from ..exceptions import ConfigurationError

__all__ = ['CameraProfile',
           'PROFILE_PRESETS',
           'DEFAULT_BANDWIDTH',
           'ewma_update',
           'load_profile_preset',
           'load_profiles',
           'save_profiles',
           ]

logger = logging.getLogger(__name__)

DEFAULT_BANDWIDTH = 1e9

PROFILE_PRESETS = {
    'jetson-nx-vehicle': {'detection_latency': {'1920x1080': 0.359, '1280x720': 0.073},
                          'id_latency': {1: 0.119, 2: 0.206, 4: 0.399}},
    'jetson-agx-vehicle': {'detection_latency': {'1920x1080': 0.084, '1280x720': 0.038},
                           'id_latency': {1: 0.065, 2: 0.121, 4: 0.217}},
    'jetson-nx-person': {'detection_latency': {'1920x1080': 0.359, '1280x720': 0.073},
                         'id_latency': {1: 0.043, 2: 0.045, 4: 0.066}},
    'jetson-agx-person': {'detection_latency': {'1920x1080': 0.084, '1280x720': 0.038},
                          'id_latency': {1: 0.018, 2: 0.020, 4: 0.028}},
}


def ewma_update(old: float, observation: float, beta: float) -> float:
    """ Exponentially weighted moving average, ``beta * observation + (1 - beta) * old``. """
    if not 0. < beta <= 1.:
        raise ValueError(f'EWMA weight must be in (0, 1]. Got {beta}')
    return beta * observation + (1. - beta) * old


@dataclass
class CameraProfile:
    """ Latency and bandwidth model of one camera.

    Parameters
    ----------
    camera_id: str

    detection_latency: dict of resolution -> float
        Detector latency in seconds per frame resolution ('WxH').

    id_latency: dict of batch size -> float
        Identification latency T(C, b) in seconds, positive and
        non-decreasing in b.

    bandwidth: dict of camera id -> float
        Bandwidth estimate towards every peer, bits per second.

    beta: float, default = 0.3
        EWMA weight of new observations.

    crop_shape: (height, width, channels), default = (128, 128, 3)
        Input size of the identification model; crops are resized to it
        before transmission.

    bytes_per_channel: int, default = 1

    resolution: str, optional
        Frame resolution of the camera, selects the detection latency.

    Attributes
    ----------
    n_batch: int
        Profiled batch size with the highest throughput b / T(C, b). Ties
        go to the smaller batch.

    id_latency_estimate: float
        EWMA estimate of T(C, n_batch), seeded from the table.
    """
    camera_id: str
    detection_latency: Dict[str, float]
    id_latency: Dict[int, float]
    bandwidth: Dict[str, float] = field(default_factory=dict)
    beta: float = 0.3
    crop_shape: Tuple[int, int, int] = (128, 128, 3)
    bytes_per_channel: int = 1
    resolution: Optional[str] = None
    n_batch: int = field(init=False)
    id_latency_estimate: float = field(init=False)

    def __post_init__(self):
        where = f'profiles.{self.camera_id}'
        if not self.id_latency:
            raise ConfigurationError('identification latency table is empty', field=f'{where}.id_latency')
        table = sorted((int(b), float(t)) for b, t in self.id_latency.items())
        for (b, t), (_, t_next) in zip(table, table[1:] + [(None, math.inf)]):
            if b < 1 or not t > 0:
                raise ConfigurationError(f'T(C, {b}) = {t} must be positive for a positive batch size',
                                         field=f'{where}.id_latency')
            if t_next < t:
                raise ConfigurationError('identification latency must be non-decreasing in the batch size',
                                         field=f'{where}.id_latency')
        self.id_latency = dict(table)
        self.detection_latency = {str(r): float(t) for r, t in self.detection_latency.items()}
        if any(t < 0 for t in self.detection_latency.values()):
            raise ConfigurationError('detection latency must be non-negative', field=f'{where}.detection_latency')
        self.bandwidth = {str(c): float(bw) for c, bw in self.bandwidth.items()}
        if any(not bw > 0 for bw in self.bandwidth.values()):
            raise ConfigurationError('bandwidth must be positive', field=f'{where}.bandwidth')
        if not 0. < self.beta <= 1.:
            raise ConfigurationError(f'EWMA weight must be in (0, 1], got {self.beta}', field=f'{where}.beta')
        self.crop_shape = tuple(int(v) for v in self.crop_shape)
        # max() keeps the first maximum, i.e. the smallest batch on ties
        self.n_batch = max(self.id_latency, key=lambda b: b / self.id_latency[b])
        self.id_latency_estimate = self.id_latency[self.n_batch]

    @property
    def throughput(self) -> float:
        """ Identifications per second at the selected batch size. """
        return self.n_batch / self.id_latency_estimate

    @property
    def crop_bits(self) -> int:
        height, width, channels = self.crop_shape
        return height * width * channels * self.bytes_per_channel * 8

    def bandwidth_to(self, peer: str) -> float:
        if peer == self.camera_id:
            return math.inf
        try:
            return self.bandwidth[peer]
        except KeyError:
            raise ValueError(f'Camera {self.camera_id} has no bandwidth estimate towards {peer}') from None

    def detection_time(self, resolution: str = None) -> float:
        """ Detector latency at `resolution`, defaulting to the camera's own. """
        resolution = resolution or self.resolution
        if resolution is None and len(self.detection_latency) == 1:
            return next(iter(self.detection_latency.values()))
        try:
            return self.detection_latency[resolution]
        except KeyError:
            raise ValueError(f'No detection latency for resolution {resolution} on camera {self.camera_id}. '
                             f'Profiled: {sorted(self.detection_latency)}') from None

    def observe_inference(self, latency_s: float) -> float:
        """ Fold a measured T(C, n_batch) into the estimate. """
        self.id_latency_estimate = ewma_update(self.id_latency_estimate, latency_s, self.beta)
        return self.id_latency_estimate

    def observe_transfer(self, peer: str, n_bits: float, seconds: float) -> float:
        """ Fold a measured transfer (data size over latency) into the bandwidth estimate. """
        if peer == self.camera_id or seconds <= 0:
            return self.bandwidth_to(peer)
        self.bandwidth[peer] = ewma_update(self.bandwidth_to(peer), n_bits / seconds, self.beta)
        return self.bandwidth[peer]

    def to_dict(self) -> dict:
        return {'camera_id': self.camera_id,
                'detection_latency': dict(self.detection_latency),
                'id_latency': {str(b): t for b, t in self.id_latency.items()},
                'bandwidth': dict(self.bandwidth),
                'beta': self.beta,
                'crop_shape': list(self.crop_shape),
                'bytes_per_channel': self.bytes_per_channel,
                'resolution': self.resolution,
                }

    @classmethod
    def from_dict(cls, values: Mapping) -> CameraProfile:
        values = dict(values)
        try:
            values['id_latency'] = {int(b): t for b, t in values['id_latency'].items()}
            return cls(**values)
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ConfigurationError):
                raise
            raise ConfigurationError(f'invalid profile: {e}', field=f'profiles.{values.get("camera_id")}') from e


def load_profile_preset(name: str, camera_id: str, peers: Sequence[str] = (), bandwidth: float = DEFAULT_BANDWIDTH,
                        resolution: str = None, **kwargs) -> CameraProfile:
    """ Profile of `camera_id` from a built-in preset.

    Parameters
    ----------
    name: str
        One of 'jetson-nx-vehicle', 'jetson-agx-vehicle', 'jetson-nx-person', 'jetson-agx-person'.

    camera_id: str

    peers: sequence of str
        Other cameras; each gets the same initial `bandwidth` estimate (bits/s).

    Raises
    ------
    ConfigurationError
        For unknown preset names.
    """
    try:
        preset = PROFILE_PRESETS[name]
    except KeyError:
        raise ConfigurationError(f'unknown profile preset {name!r}, available: {sorted(PROFILE_PRESETS)}',
                                 field='profiles') from None
    return CameraProfile(camera_id=camera_id,
                         detection_latency=dict(preset['detection_latency']),
                         id_latency=dict(preset['id_latency']),
                         bandwidth={p: bandwidth for p in peers if p != camera_id},
                         resolution=resolution,
                         **kwargs)


def save_profiles(profiles: Mapping[str, CameraProfile], path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump({c: p.to_dict() for c, p in sorted(profiles.items())}, f, indent=2, sort_keys=True)


def load_profiles(path) -> Dict[str, CameraProfile]:
    """ Read a JSON profile file: an object of camera id -> profile fields. """
    try:
        with open(path, encoding='utf-8') as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f'cannot read profile file {path}: {e}', field='profiles') from e
    profiles = {}
    for camera_id, values in raw.items():
        profiles[camera_id] = CameraProfile.from_dict({'camera_id': camera_id, **values})
    logger.info(f'Loaded {len(profiles)} camera profiles from {path}')
    return profiles
