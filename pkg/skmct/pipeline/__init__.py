# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.pipeline` package implements the multi-camera trackers:
the collaborative Argus tracker and the Conv, Spatula and CrossRoI baselines.
"""
from ..worldsim import FrameBundle, align_frames
from .base import (Query, IdentificationMode, Assignment, StepResult, LedgerRow, CostLedger,
                   TrackletElement, Tracklet, TrackingRun, TrackerBase, make_queries)
from .argus import ArgusTracker, ASSOCIATIONS, MAPPING_MODES
from .baselines import ConvTracker, SpatulaTracker
from .crossroi import CrossRoITracker, GRID_SHAPE, cell_of, learn_crossroi_masks

STRATEGIES = {'argus': ArgusTracker,
              'conv': ConvTracker,
              'spatula': SpatulaTracker,
              'crossroi': CrossRoITracker,
              }


def make_tracker(strategy: str, **kwargs) -> TrackerBase:
    """ Tracker for a strategy name, e.g. ``make_tracker('argus', queries=..., profiles=...)``.

    Raises
    ------
    ValueError
        For unknown strategies.
    """
    try:
        cls = STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f'Unknown strategy {strategy!r}. Choose one of {sorted(STRATEGIES)}') from None
    return cls(**kwargs)


__all__ = ['FrameBundle',
           'align_frames',
           'Query',
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
           'ArgusTracker',
           'ASSOCIATIONS',
           'MAPPING_MODES',
           'ConvTracker',
           'SpatulaTracker',
           'CrossRoITracker',
           'GRID_SHAPE',
           'cell_of',
           'learn_crossroi_masks',
           'STRATEGIES',
           'make_tracker',
           ]
