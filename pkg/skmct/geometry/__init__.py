# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.geometry` package provides bounding-box arithmetic.
"""
from .boxes import (BBox, FrameGeometry, DEFAULT_IOU_THRESHOLD, DEFAULT_EDGE_BAND,
                    iou, iou_matrix, boxes_match, min_dist, touches_edge, boxes_to_array)

__all__ = ['BBox',
           'FrameGeometry',
           'DEFAULT_IOU_THRESHOLD',
           'DEFAULT_EDGE_BAND',
           'iou',
           'iou_matrix',
           'boxes_match',
           'min_dist',
           'touches_edge',
           'boxes_to_array',
           ]
