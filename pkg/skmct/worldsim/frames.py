# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from ..geometry import BBox, FrameGeometry

__all__ = ['GroundTruthAnnotation',
           'CameraFrame',
           'FrameBundle',
           'align_frames',
           'DEFAULT_ALIGNMENT_MS',
           ]

DEFAULT_ALIGNMENT_MS = 3.


@dataclass(frozen=True)
class GroundTruthAnnotation:
    """ Ground truth of one object in one camera frame.

    Only oracles and metrics read annotations, never the tracking logic.
    """
    timestamp_ms: float
    camera_id: str
    object_id: str
    box: BBox
    visibility: float = 1.
    label: str = 'object'

    def __post_init__(self):
        if not 0. < self.visibility <= 1.:
            raise ValueError(f'Annotation visibility must be in (0, 1]. Got {self.visibility}')


@dataclass(frozen=True)
class CameraFrame:
    """ A single frame of one camera.

    Parameters
    ----------
    camera_id: str

    frame_index: int
        Position of the frame in its camera's stream (0, 1, 2, ...).

    timestamp_ms: float
        Capture time on the camera's clock.

    geometry: FrameGeometry

    annotations: tuple of GroundTruthAnnotation
        At most one annotation per object.
    """
    camera_id: str
    frame_index: int
    timestamp_ms: float
    geometry: FrameGeometry
    annotations: Tuple[GroundTruthAnnotation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'annotations', tuple(self.annotations))
        seen = set()
        for annotation in self.annotations:
            if annotation.object_id in seen:
                raise ValueError(f'Duplicate annotation for object {annotation.object_id} '
                                 f'in frame {self.frame_index} of camera {self.camera_id}')
            seen.add(annotation.object_id)

    @property
    def object_ids(self) -> Tuple[str, ...]:
        return tuple(a.object_id for a in self.annotations)


@dataclass(frozen=True)
class FrameBundle:
    """ Time-aligned frames processed as one tracking timestamp.

    Parameters
    ----------
    timestamp_ms: float
        Global timestamp of the bundle (timestamp of its earliest frame).

    frames: dict of camera id -> CameraFrame
        Cameras without a matching frame are absent.
    """
    timestamp_ms: float
    frames: Mapping[str, CameraFrame] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'frames', dict(sorted(self.frames.items())))

    @property
    def camera_ids(self) -> Tuple[str, ...]:
        return tuple(self.frames)

    def __getitem__(self, camera_id: str) -> CameraFrame:
        return self.frames[camera_id]

    def __contains__(self, camera_id: str) -> bool:
        return camera_id in self.frames

    def __len__(self) -> int:
        return len(self.frames)

    def annotations(self) -> Iterator[GroundTruthAnnotation]:
        for frame in self.frames.values():
            yield from frame.annotations

    def present_objects(self) -> Dict[str, set]:
        """ Object ids visible per camera (ground truth). """
        return {camera_id: set(frame.object_ids) for camera_id, frame in self.frames.items()}


def align_frames(streams: Mapping[str, Iterable[CameraFrame]],
                 threshold_ms: float = DEFAULT_ALIGNMENT_MS) -> Iterator[FrameBundle]:
    """ Group per-camera frame streams into time-aligned bundles.

    The earliest pending frame (ties by camera id) opens a bundle; every other
    camera contributes its earliest pending frame if that lies within
    `threshold_ms`. Since pending frames are never earlier than the head, this
    is the peer frame with the smallest timestamp difference. Cameras without
    such a frame are absent from the bundle.

    Parameters
    ----------
    streams: dict of camera id -> iterable of CameraFrame
        Each stream must be monotone in timestamp.

    threshold_ms: float, default = 3
        Maximum timestamp difference within a bundle.

    Yields
    ------
    FrameBundle
    """
    if threshold_ms < 0:
        raise ValueError(f'Alignment threshold must be non-negative. Got {threshold_ms}')
    pending: Dict[str, Sequence[CameraFrame]] = {}
    for camera_id, stream in streams.items():
        frames = list(stream)
        for previous, current in zip(frames, frames[1:]):
            if current.timestamp_ms < previous.timestamp_ms:
                raise ValueError(f'Frames of camera {camera_id} are not monotone in time: '
                                 f'{current.timestamp_ms} after {previous.timestamp_ms}')
        pending[camera_id] = frames
    position = {camera_id: 0 for camera_id in pending}

    while True:
        heads = [(frames[position[c]].timestamp_ms, c)
                 for c, frames in pending.items() if position[c] < len(frames)]
        if not heads:
            return
        head_time, head_camera = min(heads)
        bundle = {}
        for peer_time, camera_id in heads:
            if camera_id == head_camera or peer_time - head_time <= threshold_ms:
                bundle[camera_id] = pending[camera_id][position[camera_id]]
                position[camera_id] += 1
        yield FrameBundle(timestamp_ms=head_time, frames=bundle)
