# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

"""
The :mod:`skmct.metrics` package provides tracking quality and cost summaries.
"""
from .clear_mot import FrameScore, match_frame, motp, mota, score_run
from .report import Report, REPORT_COLUMNS, summarize

__all__ = ['FrameScore',
           'match_frame',
           'motp',
           'mota',
           'score_run',
           'Report',
           'REPORT_COLUMNS',
           'summarize',
           ]
