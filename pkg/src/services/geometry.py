"""Box arithmetic, pinhole projection and quad clipping."""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from ..models.geometry import BBox, Billboard, CameraPose, Orientation, Vec3


logger = logging.getLogger(__name__)

NEAR_PLANE = 1e-4
DEGENERATE_EXTENT = 1e-9

# Texel extent covering the whole quad: (s_min, t_min, s_max, t_max)
FULL_EXTENT = (0.0, 0.0, 1.0, 1.0)

_WORLD_DOWN = np.array([0.0, 1.0, 0.0])
_WORLD_FORWARD = np.array([0.0, 0.0, 1.0])


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two valid boxes; 0 when disjoint."""
    ax0, ay0, ax1, ay1 = a.to_corners()
    bx0, by0, bx1, by1 = b.to_corners()

    inter_w = min(ax1, bx1) - max(ax0, bx0)
    inter_h = min(ay1, by1) - max(ay0, by0)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0

    inter = inter_w * inter_h
    area_a = (ax1 - ax0) * (ay1 - ay0)
    area_b = (bx1 - bx0) * (by1 - by0)
    union = area_a + area_b - inter
    return min(1.0, inter / union)


def camera_from_fov(position: Vec3, yaw: float, pitch: float,
                    vertical_fov: float, image_size: Tuple[int, int]) -> CameraPose:
    """Build a camera from a vertical field of view with a centred principal point."""
    width, height = image_size
    focal = (height / 2.0) / math.tan(vertical_fov / 2.0)
    camera = CameraPose(
        position=tuple(float(v) for v in position),
        yaw=float(yaw),
        pitch=float(pitch),
        focal=focal,
        principal_point=(width / 2.0, height / 2.0),
        image_size=(int(width), int(height))
    )
    camera.validate()
    return camera


def rotation_matrix(yaw: float, pitch: float) -> np.ndarray:
    """Camera-to-world rotation: yaw about world y, then pitch about camera x."""
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    r_yaw = np.array([
        [cy, 0.0, sy],
        [0.0, 1.0, 0.0],
        [-sy, 0.0, cy]
    ])
    r_pitch = np.array([
        [1.0, 0.0, 0.0],
        [0.0, cp, -sp],
        [0.0, sp, cp]
    ])
    return r_yaw @ r_pitch


def world_to_camera(camera: CameraPose, points: np.ndarray) -> np.ndarray:
    """Transform (N, 3) world points into the camera frame."""
    rotation = rotation_matrix(camera.yaw, camera.pitch)
    offset = np.asarray(points, dtype=float) - np.asarray(camera.position, dtype=float)
    # Row vectors: (R^T p^T)^T = p R
    return offset @ rotation


def look_at_yaw(position: Vec3, target: Vec3) -> float:
    """Yaw that turns the forward axis toward target in the horizontal plane."""
    dx = target[0] - position[0]
    dz = target[2] - position[2]
    return math.atan2(dx, dz)


def look_at_pitch(position: Vec3, target: Vec3) -> float:
    """Pitch that tilts the forward axis toward target (y is down)."""
    dx = target[0] - position[0]
    dy = target[1] - position[1]
    dz = target[2] - position[2]
    return math.atan2(-dy, math.hypot(dx, dz))


def project_point(camera: CameraPose, p: Sequence[float]) -> Optional[Tuple[float, float]]:
    """Project a world point to pixels; None when its depth is at or behind the near plane."""
    x, y, z = world_to_camera(camera, np.asarray(p, dtype=float)[None, :])[0]
    if z <= NEAR_PLANE:
        return None
    cx, cy = camera.principal_point
    return (camera.focal * x / z + cx, camera.focal * y / z + cy)


def plane_normal(camera: CameraPose, plane: Billboard) -> Optional[np.ndarray]:
    """Unit normal used for projection; camera-facing quads point at the camera position."""
    if plane.orientation == Orientation.FIXED:
        return np.asarray(plane.normal, dtype=float)

    toward = np.asarray(camera.position, dtype=float) - np.asarray(plane.center, dtype=float)
    length = np.linalg.norm(toward)
    if length < DEGENERATE_EXTENT:
        return None
    return toward / length


def billboard_axes(normal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Texture axes (u along columns, v along rows) spanning the plane with the given normal."""
    v_axis = _WORLD_DOWN - normal * float(normal @ _WORLD_DOWN)
    if np.linalg.norm(v_axis) < DEGENERATE_EXTENT:
        # Horizontal plane: rows run along world forward
        v_axis = _WORLD_FORWARD - normal * float(normal @ _WORLD_FORWARD)
    v_axis = v_axis / np.linalg.norm(v_axis)
    u_axis = np.cross(normal, v_axis)
    return u_axis, v_axis


def billboard_frame(camera: CameraPose,
                    plane: Billboard) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """(center, normal, u_axis, v_axis) of the quad as seen by camera."""
    normal = plane_normal(camera, plane)
    if normal is None:
        return None
    u_axis, v_axis = billboard_axes(normal)
    return np.asarray(plane.center, dtype=float), normal, u_axis, v_axis


def billboard_corners(camera: CameraPose, plane: Billboard,
                      extent: Tuple[float, float, float, float] = FULL_EXTENT) -> Optional[np.ndarray]:
    """World corners (4, 3) of the texel sub-rectangle extent, in cyclic order."""
    frame = billboard_frame(camera, plane)
    if frame is None:
        return None
    center, _, u_axis, v_axis = frame

    s0, t0, s1, t1 = extent
    corners = []
    for s, t in ((s0, t0), (s1, t0), (s1, t1), (s0, t1)):
        corners.append(
            center
            + (s - 0.5) * plane.width * u_axis
            + (t - 0.5) * plane.height * v_axis
        )
    return np.array(corners)


def clip_near(polygon: np.ndarray, near: float = NEAR_PLANE) -> np.ndarray:
    """Clip a camera-frame polygon (N, 3) against z >= near (single-plane Sutherland-Hodgman)."""
    output = []
    count = len(polygon)
    for i in range(count):
        current = polygon[i]
        previous = polygon[i - 1]
        current_in = current[2] >= near
        previous_in = previous[2] >= near

        if current_in != previous_in:
            t = (near - previous[2]) / (current[2] - previous[2])
            crossing = previous + t * (current - previous)
            crossing[2] = near
            output.append(crossing)
        if current_in:
            output.append(current)

    return np.array(output).reshape(-1, 3)


def project_polygon_box(camera: CameraPose, corners_world: np.ndarray) -> Optional[BBox]:
    """Bounding rectangle of a projected world polygon, clipped to the near plane and the image."""
    clipped = clip_near(world_to_camera(camera, corners_world))
    if len(clipped) == 0:
        return None

    cx, cy = camera.principal_point
    us = camera.focal * clipped[:, 0] / clipped[:, 2] + cx
    vs = camera.focal * clipped[:, 1] / clipped[:, 2] + cy

    width, height = camera.image_size
    x0 = max(float(us.min()), 0.0)
    y0 = max(float(vs.min()), 0.0)
    x1 = min(float(us.max()), float(width))
    y1 = min(float(vs.max()), float(height))

    if x1 - x0 <= DEGENERATE_EXTENT or y1 - y0 <= DEGENERATE_EXTENT:
        return None
    return BBox.from_corners(x0, y0, x1, y1)


def project_billboard(camera: CameraPose, plane: Billboard,
                      extent: Tuple[float, float, float, float] = FULL_EXTENT) -> Optional[BBox]:
    """Visible image-space box of a billboard by corner projection.

    The quad polygon is clipped against the near plane before projection, the
    surviving vertices are projected and their bounding rectangle is intersected
    with [0, W] x [0, H]. Returns None when nothing visible remains.
    """
    corners = billboard_corners(camera, plane, extent)
    if corners is None:
        return None
    return project_polygon_box(camera, corners)


def fully_in_frame(camera: CameraPose, plane: Billboard) -> bool:
    """True when every corner is in front of the near plane and inside the image."""
    corners = billboard_corners(camera, plane)
    if corners is None:
        return False
    cam = world_to_camera(camera, corners)
    if np.any(cam[:, 2] <= NEAR_PLANE):
        return False

    cx, cy = camera.principal_point
    us = camera.focal * cam[:, 0] / cam[:, 2] + cx
    vs = camera.focal * cam[:, 1] / cam[:, 2] + cy
    width, height = camera.image_size
    return bool(np.all((us >= 0) & (us <= width) & (vs >= 0) & (vs <= height)))
