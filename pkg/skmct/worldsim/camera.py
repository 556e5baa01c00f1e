# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

from __future__ import annotations
from dataclasses import dataclass, field
import math
from typing import Optional, Tuple

import numpy as np

from ..exceptions import ConfigurationError
from ..geometry import BBox, FrameGeometry

__all__ = ['CameraModel']


@dataclass(frozen=True, eq=False)
class CameraModel:
    """ Static camera observing the ground plane through a homography.

    Parameters
    ----------
    camera_id: str

    homography: array-like, shape (3, 3)
        Projective map from ground-plane coordinates (meters, homogeneous)
        to image pixels. Must be invertible.

    geometry: FrameGeometry
        Frame size and edge band.

    frame_rate: float, default = 10
        Frames per second.

    clock_offset_ms: float, default = 0
        Offset of the camera clock against global time.

    height_scale: float, default = 1
        Factor applied to the local pixels-per-meter to draw object height.
        Small values model a high vantage point looking down on the scene.

    Notes
    -----
    The local pixels-per-meter at a ground point is the square root of the
    areal scale of the homography, ``sqrt(|det H| / |w|**3)`` with ``w`` the
    homogeneous coordinate of the projected point.
    """
    camera_id: str
    homography: np.ndarray
    geometry: FrameGeometry
    frame_rate: float = 10.
    clock_offset_ms: float = 0.
    height_scale: float = 1.
    _det: float = field(init=False, repr=False)

    def __post_init__(self):
        h = np.asarray(self.homography, dtype=float)
        if h.shape != (3, 3) or not np.all(np.isfinite(h)):
            raise ConfigurationError(f'homography of camera {self.camera_id} must be a finite 3x3 matrix',
                                     field='cameras.homography')
        det = float(np.linalg.det(h))
        if abs(det) < 1e-12:
            raise ConfigurationError(f'homography of camera {self.camera_id} is not invertible',
                                     field='cameras.homography')
        if self.frame_rate <= 0:
            raise ConfigurationError(f'frame rate must be positive, got {self.frame_rate}',
                                     field='cameras.fps')
        if self.height_scale < 0:
            raise ConfigurationError(f'height scale must be non-negative, got {self.height_scale}',
                                     field='cameras.height_scale')
        h.setflags(write=False)
        object.__setattr__(self, 'homography', h)
        object.__setattr__(self, '_det', det)

    @classmethod
    def look_at(cls, camera_id: str, target: Tuple[float, float], yaw_deg: float,
                pixels_per_meter: float, geometry: FrameGeometry, tilt: float = 0.,
                **kwargs) -> CameraModel:
        """ Build a camera centered on a ground point.

        The camera looks along the ground direction `yaw_deg` (0 = +y axis
        points up in the image). Positive `tilt` (1/m) shrinks far objects:
        the homogeneous coordinate is ``1 + tilt * depth``, with depth
        measured in meters along the viewing direction from `target`.
        """
        theta = math.radians(yaw_deg)
        cos, sin = math.cos(theta), math.sin(theta)
        cx, cy = target
        to_local = np.array([[cos, sin, -(cos * cx + sin * cy)],
                             [-sin, cos, sin * cx - cos * cy],
                             [0., 0., 1.]])
        s = float(pixels_per_meter)
        half_w, half_h = geometry.width / 2., geometry.height / 2.
        to_image = np.array([[s, half_w * tilt, half_w],
                             [0., -s + half_h * tilt, half_h],
                             [0., tilt, 1.]])
        return cls(camera_id=camera_id, homography=to_image @ to_local, geometry=geometry, **kwargs)

    def project(self, points) -> Tuple[np.ndarray, np.ndarray]:
        """ Project ground points of shape (n, 2). Returns pixels (n, 2) and homogeneous w (n,). """
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        homogeneous = np.hstack([points, np.ones((points.shape[0], 1))]) @ self.homography.T
        w = homogeneous[:, 2]
        with np.errstate(divide='ignore', invalid='ignore'):
            pixels = homogeneous[:, :2] / w[:, np.newaxis]
        return pixels, w

    def pixels_per_meter(self, points) -> np.ndarray:
        _, w = self.project(points)
        return np.sqrt(abs(self._det) / np.abs(w) ** 3)

    def object_height_pixels(self, point, height_m: float) -> float:
        """ Pixel height of an upright object of `height_m` meters standing on `point`. """
        return float(self.height_scale * height_m * self.pixels_per_meter([point])[0])

    def project_object(self, center, heading: float, footprint: Tuple[float, float, float]) -> Optional[BBox]:
        """ Image box of an object, clipped to the frame.

        Parameters
        ----------
        center: (x, y)
            Ground position of the footprint center, meters.

        heading: float
            Direction of the footprint's length axis, radians.

        footprint: (width, depth, height)
            Object size in meters; `depth` runs along the heading.

        Returns
        -------
        BBox or None
            None when the object lies behind the camera or entirely outside the frame.
        """
        width, depth, height = footprint
        cos, sin = math.cos(heading), math.sin(heading)
        half_d, half_w = depth / 2., width / 2.
        offsets = np.array([[half_d, half_w], [half_d, -half_w], [-half_d, -half_w], [-half_d, half_w]])
        rotation = np.array([[cos, -sin], [sin, cos]])
        corners = np.asarray(center, dtype=float) + offsets @ rotation.T
        pixels, w = self.project(corners)
        if np.any(w <= 0):
            return None
        x_min, y_min = pixels.min(axis=0)
        x_max, y_max = pixels.max(axis=0)
        y_min -= self.object_height_pixels(center, height)
        if not (x_min < x_max and y_min < y_max):
            return None
        return BBox(x_min, y_min, x_max, y_max).clip(self.geometry.width, self.geometry.height)

    def frame_index(self, tick: int, tick_rate: float) -> int:
        """ Number of frames captured before global tick `tick` (inclusive count minus one). """
        return int(math.floor(tick * self.frame_rate / tick_rate + 1e-9))

    def fires(self, tick: int, tick_rate: float) -> bool:
        """ Whether the camera captures a frame at global tick `tick`. """
        if tick == 0:
            return True
        return self.frame_index(tick, tick_rate) != self.frame_index(tick - 1, tick_rate)
