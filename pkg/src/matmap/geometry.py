"""Pick points from the bench (local) frame to the robot frame.

Lengths are centimetres. A vision model reports the two pick points as a
4-vector ``[x1, y1, x2, y2]`` on the bench grid; both points sit at the same
height ``h`` above the grid, and the robot needs them as ``d + R @ p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, RotationError

ROTATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Rotation3:
    matrix: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def validate_rotation(raw, tol: float = ROTATION_TOL) -> Rotation3:
    """Check that ``raw`` is a proper rotation and wrap it.

    Rejects anything whose ``R.T @ R`` differs from the identity by more than
    ``tol`` in any entry, and any orthonormal matrix with determinant -1.
    """
    R = np.array(raw, dtype=float)
    if R.shape != (3, 3):
        raise RotationError(f"rotation must be 3x3, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise RotationError("rotation has non-finite entries")
    err = np.max(np.abs(R.T @ R - np.eye(3)))
    if err > tol:
        raise RotationError(f"matrix is not orthonormal (max |R^T R - I| = {err:.3g})")
    det = np.linalg.det(R)
    if abs(det - 1.0) > tol:
        raise RotationError(f"matrix is a reflection, not a rotation (det = {det:.6g})")
    R.setflags(write=False)
    return Rotation3(R)


def rot_z(degrees: float) -> Rotation3:
    """Rotation about the z axis by ``degrees``."""
    a = math.radians(degrees)
    c, s = math.cos(a), math.sin(a)
    return validate_rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _vec3(v, what: str) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.shape != (3,):
        raise DomainError(f"{what} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} has non-finite components")
    return arr


@dataclass(frozen=True, eq=False)
class FrameTransform:
    """Pose of the bench frame in the robot frame.

    ``translation`` runs from the robot origin to the bench origin, expressed
    in the robot frame. ``plane_height`` is the local z of the pick points.
    """

    rotation: Rotation3
    translation: np.ndarray
    plane_height: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.rotation, Rotation3):
            object.__setattr__(self, "rotation", validate_rotation(self.rotation))
        d = _vec3(self.translation, "translation")
        d.setflags(write=False)
        object.__setattr__(self, "translation", d)
        if not math.isfinite(self.plane_height):
            raise DomainError("plane height must be finite")

    @classmethod
    def identity(cls, plane_height: float = 0.0) -> FrameTransform:
        return cls(validate_rotation(np.eye(3)), np.zeros(3), plane_height)

    def inverse(self) -> FrameTransform:
        Rt = self.rotation.matrix.T
        return FrameTransform(Rotation3(Rt), -Rt @ self.translation, self.plane_height)

    def then(self, outer: FrameTransform) -> FrameTransform:
        """The transform equal to applying ``self`` and then ``outer``."""
        R2, d2 = outer.rotation.matrix, outer.translation
        R = R2 @ self.rotation.matrix
        return FrameTransform(Rotation3(R), d2 + R2 @ self.translation, self.plane_height)


@dataclass(frozen=True)
class TargetVector:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x1, self.y1, self.x2, self.y2)):
            raise DomainError("target vector has non-finite components")

    @classmethod
    def from_sequence(cls, values) -> TargetVector:
        values = [float(v) for v in values]
        if len(values) != 4:
            raise DomainError(f"target vector needs 4 values, got {len(values)}")
        return cls(*values)


class PickPoints(NamedTuple):
    first: np.ndarray
    second: np.ndarray

    @property
    def degenerate(self) -> bool:
        """True when both pick points coincide (e.g. a damaged device)."""
        return bool(np.array_equal(self.first, self.second))


def split_target(t: TargetVector, h: float) -> PickPoints:
    return PickPoints(np.array([t.x1, t.y1, h]), np.array([t.x2, t.y2, h]))


def to_robot_frame(f: FrameTransform, p_local) -> np.ndarray:
    return f.translation + f.rotation.matrix @ _vec3(p_local, "point")


def pick_points_robot(f: FrameTransform, t: TargetVector) -> PickPoints:
    local = split_target(t, f.plane_height)
    return PickPoints(to_robot_frame(f, local.first), to_robot_frame(f, local.second))
