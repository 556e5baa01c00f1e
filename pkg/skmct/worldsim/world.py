# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass
import logging
import math
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigurationError
from ..geometry import BBox
from ..utils.seeding import derive_random_state
from .camera import CameraModel
from .frames import CameraFrame, FrameBundle, GroundTruthAnnotation

__all__ = ['ObjectSpec',
           'WorldConfig',
           'SyntheticWorld',
           'generate_world',
           'TRAJECTORIES',
           ]

logger = logging.getLogger(__name__)

TRAJECTORIES = ['static', 'waypoints', 'random_walk']

# Heading diffusion of random walks, rad / sqrt(s)
_TURN_SIGMA = 0.6


@dataclass(frozen=True)
class ObjectSpec:
    """ One object of the synthetic world.

    Parameters
    ----------
    object_id: str

    label: str, default = 'person'
        Object class reported by the detector.

    footprint: (width, depth, height), meters

    trajectory: {'static', 'waypoints', 'random_walk'}
        - 'static' stays at `position`
        - 'waypoints' moves along the polyline `waypoints` at constant speed;
          `mode` 'loop' restarts at the first waypoint, 'bounce' turns around
        - 'random_walk' starts at `position` (random if None) with a speed
          drawn from `speed` and a diffusing heading, reflected at `region`

    speed: (min, max), m/s
        Speed bounds; the speed is drawn once per object.

    start_offset: float, meters
        Initial distance travelled along the waypoint path.

    region: (x_min, y_min, x_max, y_max), optional
        Walk region inside the plane. Defaults to the whole plane.
    """
    object_id: str
    label: str = 'person'
    footprint: Tuple[float, float, float] = (0.6, 0.6, 1.7)
    trajectory: str = 'static'
    position: Optional[Tuple[float, float]] = None
    waypoints: Tuple[Tuple[float, float], ...] = ()
    speed: Tuple[float, float] = (1., 1.)
    mode: str = 'loop'
    start_offset: float = 0.
    region: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, 'object_id', str(self.object_id))
        object.__setattr__(self, 'footprint', tuple(float(v) for v in self.footprint))
        object.__setattr__(self, 'speed', tuple(float(v) for v in self.speed))
        object.__setattr__(self, 'waypoints', tuple(tuple(float(c) for c in p) for p in self.waypoints))
        if self.position is not None:
            object.__setattr__(self, 'position', tuple(float(c) for c in self.position))
        if self.region is not None:
            object.__setattr__(self, 'region', tuple(float(c) for c in self.region))


@dataclass(frozen=True)
class WorldConfig:
    """ Ground plane, objects and timeline of a synthetic world.

    Parameters
    ----------
    extent: (width, depth), meters
        The plane spans [0, width] x [0, depth].

    objects: tuple of ObjectSpec

    tick_rate: float, default = 10
        Global simulation rate in Hz.

    duration: int, default = 100
        Number of global ticks.

    seed: int, default = 0
        Seed of all world randomness.
    """
    extent: Tuple[float, float] = (40., 40.)
    objects: Tuple[ObjectSpec, ...] = ()
    tick_rate: float = 10.
    duration: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'objects', tuple(self.objects))
        object.__setattr__(self, 'extent', tuple(float(v) for v in self.extent))

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def tick_ms(self) -> float:
        return 1000. / self.tick_rate

    def validate(self) -> WorldConfig:
        """ Raise ConfigurationError for inconsistent settings. """
        width, depth = self.extent
        if not (width > 0 and depth > 0):
            raise ConfigurationError(f'plane extents must be positive, got {self.extent}', field='world.extent')
        if not self.tick_rate > 0:
            raise ConfigurationError(f'tick rate must be positive, got {self.tick_rate}', field='world.tick_rate')
        if self.duration < 0:
            raise ConfigurationError(f'duration must be non-negative, got {self.duration}', field='world.duration')
        ids = [o.object_id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ConfigurationError('object ids must be unique', field='world.objects')
        for obj in self.objects:
            self._validate_object(obj)
        return self

    def _inside(self, point, region=None) -> bool:
        x_min, y_min, x_max, y_max = region if region is not None else (0., 0.) + self.extent
        x, y = point
        return x_min <= x <= x_max and y_min <= y <= y_max

    def _validate_object(self, obj: ObjectSpec):
        where = f'world.objects[{obj.object_id}]'
        if obj.trajectory not in TRAJECTORIES:
            raise ConfigurationError(f'unknown trajectory {obj.trajectory!r}, expected one of {TRAJECTORIES}',
                                     field=f'{where}.trajectory')
        if len(obj.footprint) != 3 or min(obj.footprint) <= 0:
            raise ConfigurationError(f'footprint must be three positive sizes, got {obj.footprint}',
                                     field=f'{where}.footprint')
        low, high = obj.speed
        if obj.trajectory != 'static' and not 0 < low <= high:
            raise ConfigurationError(f'speed bounds must satisfy 0 < min <= max, got {obj.speed}',
                                     field=f'{where}.speed')
        if obj.region is not None:
            x_min, y_min, x_max, y_max = obj.region
            if not (x_min < x_max and y_min < y_max) or not (self._inside((x_min, y_min))
                                                             and self._inside((x_max, y_max))):
                raise ConfigurationError(f'region {obj.region} is not inside the plane', field=f'{where}.region')
        if obj.position is not None and not self._inside(obj.position, obj.region):
            raise ConfigurationError(f'position {obj.position} leaves the plane', field=f'{where}.position')
        if obj.trajectory == 'static' and obj.position is None:
            raise ConfigurationError('static objects need a position', field=f'{where}.position')
        if obj.trajectory == 'waypoints':
            if len(obj.waypoints) == 0:
                raise ConfigurationError('waypoint trajectory without waypoints', field=f'{where}.waypoints')
            for point in obj.waypoints:
                if not self._inside(point):
                    raise ConfigurationError(f'waypoint {point} leaves the plane', field=f'{where}.waypoints')
            if len(obj.waypoints) > 1 and np.any(np.linalg.norm(np.diff(obj.waypoints, axis=0), axis=1) == 0):
                raise ConfigurationError('consecutive waypoints must differ', field=f'{where}.waypoints')
            if obj.mode not in ('loop', 'bounce'):
                raise ConfigurationError(f"mode must be 'loop' or 'bounce', got {obj.mode!r}", field=f'{where}.mode')


class SyntheticWorld:
    """ Deterministic world history and its ground truth as seen by a set of cameras.

    Parameters
    ----------
    config: WorldConfig

    cameras: sequence of CameraModel

    Attributes
    ----------
    positions_: np.ndarray, shape (duration, n_objects, 2)
        Ground position of every object at every tick.

    headings_: np.ndarray, shape (duration, n_objects)
        Heading of every object at every tick, radians.
    """

    def __init__(self, config: WorldConfig, cameras: Sequence[CameraModel]):
        self.config = config.validate()
        self.cameras = sorted(cameras, key=lambda c: c.camera_id)
        ids = [c.camera_id for c in self.cameras]
        if len(set(ids)) != len(ids):
            raise ConfigurationError('camera ids must be unique', field='cameras')
        self.positions_, self.headings_ = self._simulate()
        logger.debug(f'Simulated {config.n_objects} objects over {config.duration} ticks '
                     f'for {len(self.cameras)} cameras')

    def _simulate(self) -> Tuple[np.ndarray, np.ndarray]:
        cfg = self.config
        positions = np.zeros((cfg.duration, cfg.n_objects, 2))
        headings = np.zeros((cfg.duration, cfg.n_objects))
        dt = 1. / cfg.tick_rate
        for j, obj in enumerate(cfg.objects):
            random_state = derive_random_state(cfg.seed, obj.object_id, 'trajectory')
            if obj.trajectory == 'static':
                positions[:, j] = obj.position
            elif obj.trajectory == 'waypoints':
                positions[:, j], headings[:, j] = self._follow_waypoints(obj, random_state, dt)
            else:
                positions[:, j], headings[:, j] = self._random_walk(obj, random_state, dt)
        return positions, headings

    def _follow_waypoints(self, obj: ObjectSpec, random_state, dt: float):
        duration = self.config.duration
        points = np.array(obj.waypoints, dtype=float)
        if len(points) == 1:
            return np.repeat(points, duration, axis=0), np.zeros(duration)
        speed = random_state.uniform(*obj.speed)
        segments = np.diff(points, axis=0)
        lengths = np.linalg.norm(segments, axis=1)
        cumulative = np.concatenate([[0.], np.cumsum(lengths)])
        total = cumulative[-1]
        travelled = obj.start_offset + speed * dt * np.arange(duration)
        backwards = np.zeros(duration, dtype=bool)
        if obj.mode == 'loop':
            s = np.mod(travelled, total)
        else:
            s = np.mod(travelled, 2 * total)
            backwards = s > total
            s = np.where(backwards, 2 * total - s, s)
        segment = np.clip(np.searchsorted(cumulative, s, side='right') - 1, 0, len(lengths) - 1)
        fraction = (s - cumulative[segment]) / lengths[segment]
        positions = points[segment] + fraction[:, np.newaxis] * segments[segment]
        headings = np.arctan2(segments[segment, 1], segments[segment, 0]) + np.where(backwards, np.pi, 0.)
        return positions, headings

    def _random_walk(self, obj: ObjectSpec, random_state, dt: float):
        duration = self.config.duration
        x_min, y_min, x_max, y_max = obj.region if obj.region is not None else (0., 0.) + self.config.extent
        if obj.position is None:
            position = np.array([random_state.uniform(x_min, x_max), random_state.uniform(y_min, y_max)])
        else:
            position = np.array(obj.position, dtype=float)
        speed = random_state.uniform(*obj.speed)
        heading = random_state.uniform(-np.pi, np.pi)
        turns = random_state.normal(0., _TURN_SIGMA * math.sqrt(dt), size=duration)
        positions = np.zeros((duration, 2))
        headings = np.zeros(duration)
        for k in range(duration):
            positions[k], headings[k] = position, heading
            heading += turns[k]
            step = speed * dt * np.array([math.cos(heading), math.sin(heading)])
            position = position + step
            # Reflect at the region bounds
            if position[0] < x_min or position[0] > x_max:
                position[0] = 2 * (x_min if position[0] < x_min else x_max) - position[0]
                heading = math.pi - heading
            if position[1] < y_min or position[1] > y_max:
                position[1] = 2 * (y_min if position[1] < y_min else y_max) - position[1]
                heading = -heading
        return positions, headings

    def annotate(self, camera: CameraModel, tick: int, timestamp_ms: float) -> List[GroundTruthAnnotation]:
        """ Ground-truth annotations of one camera at one tick, after occlusion. """
        visible = []
        for j, obj in enumerate(self.config.objects):
            box = camera.project_object(self.positions_[tick, j], self.headings_[tick, j], obj.footprint)
            if box is not None:
                visible.append((obj, box))
        # Nearest first: the footprint of a nearer object projects lower in the image
        visible.sort(key=lambda item: (-item[1].y_max, item[0].object_id))
        annotations = []
        boxes = np.empty((0, 4))
        for obj, box in visible:
            covered = _covered_fraction(box.to_array(), boxes)
            boxes = np.vstack([boxes, box.to_array()])
            visibility = 1. - covered
            if visibility <= 1e-9:
                continue
            annotations.append(GroundTruthAnnotation(timestamp_ms=timestamp_ms,
                                                     camera_id=camera.camera_id,
                                                     object_id=obj.object_id,
                                                     box=box,
                                                     visibility=min(visibility, 1.),
                                                     label=obj.label))
        return sorted(annotations, key=lambda a: a.object_id)

    def camera_streams(self) -> Dict[str, Iterator[CameraFrame]]:
        """ Per-camera frame streams with camera clock offsets applied. """
        return {camera.camera_id: self._stream(camera) for camera in self.cameras}

    def _stream(self, camera: CameraModel) -> Iterator[CameraFrame]:
        cfg = self.config
        for tick in range(cfg.duration):
            if camera.fires(tick, cfg.tick_rate):
                yield self._frame(camera, tick)

    def _frame(self, camera: CameraModel, tick: int) -> CameraFrame:
        timestamp = tick * self.config.tick_ms + camera.clock_offset_ms
        return CameraFrame(camera_id=camera.camera_id,
                           frame_index=camera.frame_index(tick, self.config.tick_rate),
                           timestamp_ms=timestamp,
                           geometry=camera.geometry,
                           annotations=tuple(self.annotate(camera, tick, timestamp)))

    def bundles(self) -> Iterator[FrameBundle]:
        """ One bundle per global tick with the frames of every camera firing at that tick. """
        cfg = self.config
        for tick in range(cfg.duration):
            frames = {camera.camera_id: self._frame(camera, tick)
                      for camera in self.cameras if camera.fires(tick, cfg.tick_rate)}
            yield FrameBundle(timestamp_ms=tick * cfg.tick_ms, frames=frames)

    def labels(self) -> Dict[str, str]:
        return {obj.object_id: obj.label for obj in self.config.objects}


def generate_world(config: WorldConfig, cameras: Sequence[CameraModel]) -> Iterator[FrameBundle]:
    """ Stream of FrameBundles of a synthetic world, one per global tick.

    Raises ConfigurationError at build time for invalid configurations,
    e.g. a waypoint outside the plane.
    """
    return SyntheticWorld(config, cameras).bundles()


def _covered_fraction(box: np.ndarray, occluders: np.ndarray) -> float:
    """ Fraction of `box` covered by the union of `occluders`, by coordinate compression. """
    if occluders.shape[0] == 0:
        return 0.
    clipped = np.column_stack([np.maximum(occluders[:, 0], box[0]), np.maximum(occluders[:, 1], box[1]),
                               np.minimum(occluders[:, 2], box[2]), np.minimum(occluders[:, 3], box[3])])
    clipped = clipped[(clipped[:, 0] < clipped[:, 2]) & (clipped[:, 1] < clipped[:, 3])]
    if clipped.shape[0] == 0:
        return 0.
    xs = np.unique(np.concatenate([box[[0, 2]], clipped[:, 0], clipped[:, 2]]))
    ys = np.unique(np.concatenate([box[[1, 3]], clipped[:, 1], clipped[:, 3]]))
    cx = (xs[:-1] + xs[1:]) / 2
    cy = (ys[:-1] + ys[1:]) / 2
    inside_x = (clipped[:, 0, np.newaxis] <= cx) & (cx <= clipped[:, 2, np.newaxis])
    inside_y = (clipped[:, 1, np.newaxis] <= cy) & (cy <= clipped[:, 3, np.newaxis])
    covered = np.any(inside_y[:, :, np.newaxis] & inside_x[:, np.newaxis, :], axis=0)
    cell_area = np.diff(ys)[:, np.newaxis] * np.diff(xs)[np.newaxis, :]
    box_area = (box[2] - box[0]) * (box[3] - box[1])
    return float(cell_area[covered].sum() / box_area)
