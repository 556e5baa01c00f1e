# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import Dict, Mapping, Sequence, Union

import numpy as np

from .profiles import CameraProfile

__all__ = ['DistributionPlan',
           'transmission_delay',
           'batched_latency',
           'plan_distribution',
           ]


@dataclass(frozen=True)
class DistributionPlan:
    """ Assignment of identification crops to cameras.

    Attributes
    ----------
    host: str
        Camera holding the crops.

    assignment: dict of camera id -> int
        Crops processed per camera, summing to the number of crops.

    makespan: float
        Time until the last camera finishes, seconds.

    transmission: dict of camera id -> float
        Predicted transfer time from the host, seconds.

    processing: dict of camera id -> float
        Predicted batched identification time, seconds.
    """
    host: str
    assignment: Dict[str, int] = field(default_factory=dict)
    makespan: float = 0.
    transmission: Dict[str, float] = field(default_factory=dict)
    processing: Dict[str, float] = field(default_factory=dict)

    @property
    def n_crops(self) -> int:
        return sum(self.assignment.values())

    @property
    def n_remote(self) -> int:
        """ Crops sent away from the host. """
        return sum(n for c, n in self.assignment.items() if c != self.host)


def transmission_delay(source: CameraProfile, target: CameraProfile, n: int,
                       crop_shape=None, bytes_per_channel: int = None) -> float:
    """ Time to send `n` crops from `source` to `target`, seconds.

    ``H * W * channels * bytes_per_channel * 8 * n / BW(source -> target)``,
    zero for self-transfers. Crop size defaults to the source profile.
    """
    if n < 0:
        raise ValueError(f'Crop count must be non-negative. Got {n}')
    if n == 0 or source.camera_id == target.camera_id:
        return 0.
    bandwidth = source.bandwidth_to(target.camera_id)
    height, width, channels = source.crop_shape if crop_shape is None else crop_shape
    if bytes_per_channel is None:
        bytes_per_channel = source.bytes_per_channel
    return height * width * channels * bytes_per_channel * 8 * n / bandwidth


def batched_latency(profile: CameraProfile, n: int) -> float:
    """ Identification time of `n` crops in batches of n_batch, ``ceil(n / n_batch) * T(C, n_batch)``. """
    if n < 0:
        raise ValueError(f'Crop count must be non-negative. Got {n}')
    if n == 0:
        return 0.
    return math.ceil(n / profile.n_batch) * profile.id_latency_estimate


def _costs(host: CameraProfile, profile: CameraProfile, n: int):
    transmission = np.array([transmission_delay(host, profile, m) for m in range(n + 1)])
    processing = np.array([batched_latency(profile, m) for m in range(n + 1)])
    return transmission, processing


def plan_distribution(host: str, n: int, profiles: Union[Mapping[str, CameraProfile], Sequence[CameraProfile]],
                      candidates: Sequence[str] = None) -> DistributionPlan:
    """ Distribute `n` identification crops of the host so that the last camera finishes first.

    Minimizes ``max_j (TD(host -> j, n_j) + BP(j, n_j))`` subject to
    ``sum_j n_j = n`` exactly, by dynamic programming over the crop count.
    Among optimal assignments, the host takes as many crops as possible,
    then the remaining cameras in id order.

    Parameters
    ----------
    host: str
        Camera that holds the crops.

    n: int
        Number of crops.

    profiles: dict of camera id -> CameraProfile, or list of CameraProfile

    candidates: sequence of str, optional
        Cameras allowed to take crops. Defaults to all profiled cameras.
        The host is always a candidate.

    Returns
    -------
    DistributionPlan
    """
    if n < 0:
        raise ValueError(f'Crop count must be non-negative. Got {n}')
    if not isinstance(profiles, Mapping):
        profiles = {p.camera_id: p for p in profiles}
    if host not in profiles:
        raise ValueError(f'No profile for host camera {host}')
    if candidates is None:
        candidates = profiles
    others = sorted(c for c in set(candidates) if c != host)
    unknown = [c for c in others if c not in profiles]
    if unknown:
        raise ValueError(f'No profile for cameras {unknown}')
    cameras = [host] + others
    n = int(n)
    if n == 0:
        return DistributionPlan(host=host, assignment={c: 0 for c in cameras},
                                transmission={c: 0. for c in cameras}, processing={c: 0. for c in cameras})

    source = profiles[host]
    costs = []
    for camera_id in cameras:
        transmission, processing = _costs(source, profiles[camera_id], n)
        costs.append((transmission, processing, transmission + processing))

    # best[k, m]: optimal makespan of m crops on cameras k, k+1, ...
    n_cameras = len(cameras)
    best = np.full((n_cameras + 1, n + 1), np.inf)
    best[n_cameras, 0] = 0.
    for k in range(n_cameras - 1, -1, -1):
        total = costs[k][2]
        for m in range(n + 1):
            best[k, m] = np.min(np.maximum(total[:m + 1], best[k + 1, m::-1]))

    assignment, remaining = {}, n
    for k, camera_id in enumerate(cameras):
        total = costs[k][2]
        spans = np.maximum(total[:remaining + 1], best[k + 1, remaining::-1])
        # Largest share that stays optimal
        share = int(np.flatnonzero(spans == best[k, remaining]).max())
        assignment[camera_id] = share
        remaining -= share

    transmission = {c: float(costs[k][0][assignment[c]]) for k, c in enumerate(cameras)}
    processing = {c: float(costs[k][1][assignment[c]]) for k, c in enumerate(cameras)}
    makespan = max(float(costs[k][2][assignment[c]]) for k, c in enumerate(cameras))
    return DistributionPlan(host=host, assignment=assignment, makespan=makespan,
                            transmission=transmission, processing=processing)
