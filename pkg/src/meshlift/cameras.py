"""Orthographic cameras and the fixed multi-view rigs.

Conventions (fixed; the engine both renders and consumes views, so only
bit-consistency matters):

* world up is +Z; the azimuth-0 camera sits on the +Y axis looking
  toward -Y; azimuth rotates counter-clockwise about +Z.
* image x grows rightward as seen by the camera, image y grows
  downward; pixel (0, 0) is top-left and pixel centers sit at
  half-integer coordinates.
* depth increases away from the camera, zero at the world origin plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

SIX_VIEW_AZIMUTHS = (0.0, 45.0, 90.0, 180.0, 270.0, 315.0)
EIGHT_VIEW_AZIMUTHS = tuple(float(a) for a in range(0, 360, 45))

_EXACT_TRIG = {0.0: (1.0, 0.0), 90.0: (0.0, 1.0), 180.0: (-1.0, 0.0), 270.0: (0.0, -1.0)}


def _cos_sin_deg(angle):
    """cos/sin with exact values at multiples of 90 degrees."""
    a = float(angle) % 360.0
    if a in _EXACT_TRIG:
        return _EXACT_TRIG[a]
    r = math.radians(a)
    return math.cos(r), math.sin(r)


@dataclass(frozen=True)
class OrthoCamera:
    """Orthographic view description.

    ortho_half_extent is half the visible width/height in world units;
    near/far bound the depth range used when depth rasters are encoded
    to files.
    """

    azimuth: float
    elevation: float
    ortho_half_extent: float
    resolution: int
    near: float = field(default=None)  # type: ignore[assignment]
    far: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.ortho_half_extent <= 0:
            raise ValueError("ortho_half_extent must be positive")
        if self.resolution < 16:
            raise ValueError("resolution must be at least 16")
        if self.near is None:
            object.__setattr__(self, "near", -2.0 * self.ortho_half_extent)
        if self.far is None:
            object.__setattr__(self, "far", 2.0 * self.ortho_half_extent)
        if not self.near < self.far:
            raise ValueError("near must be less than far")

    @property
    def view_direction(self) -> np.ndarray:
        """Unit vector from the camera toward the scene."""
        ca, sa = _cos_sin_deg(self.azimuth)
        ce, se = _cos_sin_deg(self.elevation)
        return np.array([sa * ce, -ca * ce, -se])

    @property
    def right(self) -> np.ndarray:
        f = self.view_direction
        r = np.cross(np.array([0.0, 0.0, 1.0]), f)
        n = np.linalg.norm(r)
        if n < 1e-12:
            raise ValueError("camera looks along the world up axis")
        return r / n

    @property
    def up(self) -> np.ndarray:
        return np.cross(self.view_direction, self.right)

    def axes(self):
        """(right, up, forward) basis as a 3x3 array of rows."""
        f = self.view_direction
        r = self.right
        return np.stack([r, np.cross(f, r), f])

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        """Project points to (x_cam, y_cam, depth) camera coordinates."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.axes().T

    def world_to_pixel_array(self, points: np.ndarray):
        """Vectorized projection to continuous (px, py, depth)."""
        cam = self.world_to_camera(np.atleast_2d(points))
        h = self.ortho_half_extent
        scale = self.resolution / (2.0 * h)
        px = (cam[:, 0] + h) * scale
        py = (h - cam[:, 1]) * scale
        return px, py, cam[:, 2]

    @property
    def pixels_per_unit(self) -> float:
        return self.resolution / (2.0 * self.ortho_half_extent)


def world_to_pixel(camera: OrthoCamera, point):
    """Project one world point to (pixel x, pixel y, depth).

    Points outside the frustum simply yield out-of-range pixel values.
    """
    px, py, depth = camera.world_to_pixel_array(np.asarray(point, dtype=np.float64))
    return float(px[0]), float(py[0]), float(depth[0])


@dataclass(frozen=True)
class CameraRig:
    """Ordered list of cameras sharing resolution and extent."""

    cameras: List[OrthoCamera]

    def __post_init__(self):
        if not self.cameras:
            raise ValueError("rig must contain at least one camera")
        res = {c.resolution for c in self.cameras}
        ext = {c.ortho_half_extent for c in self.cameras}
        if len(res) != 1 or len(ext) != 1:
            raise ValueError("rig cameras must share resolution and half extent")

    def __iter__(self):
        return iter(self.cameras)

    def __len__(self):
        return len(self.cameras)

    def __getitem__(self, i):
        return self.cameras[i]

    @property
    def resolution(self) -> int:
        return self.cameras[0].resolution

    @property
    def half_extent(self) -> float:
        return self.cameras[0].ortho_half_extent


def standard_rig_six(resolution: int = 512, half_extent: float = 1.0) -> CameraRig:
    """The fixed six-view rig; the first (azimuth 0) camera is the edit view."""
    return CameraRig(
        [OrthoCamera(a, 0.0, half_extent, resolution) for a in SIX_VIEW_AZIMUTHS]
    )


def training_rig_eight(resolution: int = 512, half_extent: float = 1.0) -> CameraRig:
    """Eight cameras at 45 degree steps, elevation 0."""
    return CameraRig(
        [OrthoCamera(a, 0.0, half_extent, resolution) for a in EIGHT_VIEW_AZIMUTHS]
    )


def fit_half_extent(mesh, fill: float = 0.9) -> float:
    """Half extent such that the mesh bounding sphere fills `fill` of the frame.

    The rig always aims at the world origin, so the bounding sphere is
    taken about the origin.
    """
    if mesh.n_vertices == 0:
        return 1.0
    radius = float(np.linalg.norm(mesh.positions, axis=1).max())
    if radius == 0.0:
        return 1.0
    return radius / fill
