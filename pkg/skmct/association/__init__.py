# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.association` package stores what is known about objects
across cameras (mapping entries) and across frames (temporal cache), so
that identities can be reused instead of recomputed.
"""
from .mapping import ABSENT, SKIP_CAMERA, Expect, MappingEntry, MappingTable, predict_slots, SNAPSHOT_COLUMNS
from .temporal import TemporalCache, TemporalCacheRecord

__all__ = ['ABSENT',
           'SKIP_CAMERA',
           'Expect',
           'MappingEntry',
           'MappingTable',
           'predict_slots',
           'SNAPSHOT_COLUMNS',
           'TemporalCache',
           'TemporalCacheRecord',
           ]
