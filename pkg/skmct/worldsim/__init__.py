# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.worldsim` package simulates overlapping cameras observing
moving objects, and provides the detection and identification oracles
that stand in for real models.
"""
from .camera import CameraModel
from .frames import GroundTruthAnnotation, CameraFrame, FrameBundle, align_frames, DEFAULT_ALIGNMENT_MS
from .oracles import (Detection, DetectionOracle, IdentificationOracle,
                      detect, extract_id_feature, similarity)
from .trace import TRACE_COLUMNS, ingest_trace, write_trace
from .world import ObjectSpec, WorldConfig, SyntheticWorld, generate_world, TRAJECTORIES

__all__ = ['CameraModel',
           'GroundTruthAnnotation',
           'CameraFrame',
           'FrameBundle',
           'align_frames',
           'DEFAULT_ALIGNMENT_MS',
           'Detection',
           'DetectionOracle',
           'IdentificationOracle',
           'detect',
           'extract_id_feature',
           'similarity',
           'TRACE_COLUMNS',
           'ingest_trace',
           'write_trace',
           'ObjectSpec',
           'WorldConfig',
           'SyntheticWorld',
           'generate_world',
           'TRAJECTORIES',
           ]
