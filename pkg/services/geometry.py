"""Unified 7-DoF grounding frame: construction, point transforms and box conversion."""

import math

import numpy as np
from scipy.spatial.transform import Rotation

from core.config import DEGENERACY_EPS
from core.errors import (
    DegenerateFrameError,
    GimbalDegenerateError,
    MissingTrajectoryError,
    NonFiniteError,
)
from core.logging import service_logger
from domain.models import Box7DoF, Box9DoF, CameraFrame, Scene, UnifiedFrame, Vec3

WORLD_UP = np.array([0.0, 0.0, 1.0])
TWO_PI = 2.0 * math.pi


def wrap_yaw(theta: float) -> float:
    """Reduce an angle to (−π, π]."""
    if not math.isfinite(theta):
        raise NonFiniteError(f"yaw must be finite, got {theta}", value=theta)
    wrapped = math.remainder(theta, TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def rotation_about_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def look_rotation(forward: np.ndarray | tuple[float, float, float]) -> np.ndarray:
    """Camera-to-world rotation (x right, y down, z forward) looking along ``forward``."""
    z_axis = np.asarray(forward, dtype=float)
    z_axis = z_axis / np.linalg.norm(z_axis)
    right = np.cross(z_axis, WORLD_UP)
    if np.linalg.norm(right) < DEGENERACY_EPS:
        right = np.cross(z_axis, np.array([0.0, 1.0, 0.0]))
    right = right / np.linalg.norm(right)
    down = np.cross(z_axis, right)
    return np.column_stack([right, down, z_axis])


def build_unified_frame(first: CameraFrame) -> UnifiedFrame:
    """
    Build the global grounding frame from the first camera.

    The origin is the camera's optical center; +x is the normalized ground-plane
    projection of its optical axis; +z is source gravity-up; +y = up × x.

    Raises:
        DegenerateFrameError: If the optical axis is within ``DEGENERACY_EPS`` of vertical
    """
    axis = first.optical_axis()
    projection = axis - float(axis @ WORLD_UP) * WORLD_UP
    norm = float(np.linalg.norm(projection))
    if norm < DEGENERACY_EPS:
        raise DegenerateFrameError(
            "optical axis of the first camera is vertical; ground-plane heading undefined",
            frame_index=first.index,
            projection_norm=norm,
        )
    x_axis = projection / norm
    y_axis = np.cross(WORLD_UP, x_axis)
    return UnifiedFrame(
        origin=first.optical_center,
        x_axis=Vec3.from_array(x_axis),
        y_axis=Vec3.from_array(y_axis),
        up=Vec3.from_array(WORLD_UP),
    )


def scene_unified_frame(scene: Scene) -> UnifiedFrame:
    """Unified frame of a scene, built from its lowest-index camera."""
    first = scene.first_camera()
    if first is None:
        raise MissingTrajectoryError(
            f"scene {scene.scene_id!r} has no camera trajectory",
            scene_id=scene.scene_id,
        )
    try:
        return build_unified_frame(first)
    except DegenerateFrameError as exc:
        exc.detail["scene_id"] = scene.scene_id
        raise


def transform_point(frame: UnifiedFrame, point: Vec3) -> Vec3:
    """Express a source-frame point in the unified frame."""
    local = frame.basis().T @ (point.as_array() - frame.origin.as_array())
    return Vec3.from_array(local)


def box9_to_box7(frame: UnifiedFrame, box: Box9DoF) -> Box7DoF:
    """
    Convert a 9-DoF box to the unified 7-DoF parameterization.

    Sizes are copied unchanged; yaw is the Z angle of the Z-Y-X Euler decomposition
    of the box rotation expressed in the unified frame.

    Raises:
        GimbalDegenerateError: If the box's local x-axis is (nearly) vertical
    """
    rotation = frame.basis().T @ box.rotation_array()
    heading = float(math.hypot(rotation[0, 0], rotation[1, 0]))
    if heading < DEGENERACY_EPS:
        raise GimbalDegenerateError(
            "box local x-axis is vertical; yaw undefined",
            heading_norm=heading,
        )
    yaw = float(Rotation.from_matrix(rotation).as_euler("ZYX")[0])
    return Box7DoF(center=transform_point(frame, box.center), size=box.size, yaw=wrap_yaw(yaw))


def scene_bev_positions(scene: Scene) -> dict[str, np.ndarray]:
    """
    BEV (x, y) of every box center.

    Unified-frame coordinates when the scene has a usable trajectory, source
    coordinates otherwise. The two differ by a rotation about +z and a translation.
    """
    frame: UnifiedFrame | None = None
    if scene.trajectory:
        try:
            frame = scene_unified_frame(scene)
        except DegenerateFrameError as exc:
            service_logger.warning(
                "Using source BEV coordinates",
                scene_id=scene.scene_id,
                reason=exc.message,
            )
    positions: dict[str, np.ndarray] = {}
    for obj in scene.objects:
        center = transform_point(frame, obj.box.center) if frame else obj.box.center
        positions[obj.id] = np.array([center.x, center.y], dtype=float)
    return positions
