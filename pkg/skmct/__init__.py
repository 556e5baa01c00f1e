# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

""" Python package for multi-camera multi-target tracking with cross-camera collaboration."""

__version__ = '0.1.0a1'

from . import exceptions
from . import geometry
from . import worldsim
from . import association
from . import scheduler
from . import pipeline
from . import metrics
from . import data
from . import utils
from .pipeline import ArgusTracker, ConvTracker, SpatulaTracker, CrossRoITracker


__all__ = ['association',
           'data',
           'exceptions',
           'geometry',
           'metrics',
           'pipeline',
           'scheduler',
           'utils',
           'worldsim',
           'ArgusTracker',
           'ConvTracker',
           'CrossRoITracker',
           'SpatulaTracker',
           ]
