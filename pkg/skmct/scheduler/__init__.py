# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.scheduler` package decides the inspection order of cameras
and boxes, and distributes identification work across cameras.
"""
from .distribution import DistributionPlan, transmission_delay, batched_latency, plan_distribution
from .inspection import (INSPECTION_ORDERS, InspectionState, camera_priority, order_cameras,
                         box_order, order_boxes)
from .profiles import (CameraProfile, PROFILE_PRESETS, DEFAULT_BANDWIDTH, ewma_update,
                       load_profile_preset, load_profiles, save_profiles)

__all__ = ['DistributionPlan',
           'transmission_delay',
           'batched_latency',
           'plan_distribution',
           'INSPECTION_ORDERS',
           'InspectionState',
           'camera_priority',
           'order_cameras',
           'box_order',
           'order_boxes',
           'CameraProfile',
           'PROFILE_PRESETS',
           'DEFAULT_BANDWIDTH',
           'ewma_update',
           'load_profile_preset',
           'load_profiles',
           'save_profiles',
           ]
