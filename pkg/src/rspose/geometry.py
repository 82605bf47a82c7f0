"""Core rolling-shutter two-view geometry.

Conventions used throughout the package:

- The relative pose maps camera-1 coordinates to camera-2 coordinates as
  x2 = R (x1 - t), so t is the camera-2 center expressed in the camera-1
  frame and the global-shutter essential matrix is E = R [t]_x.
- The canonical vertical axis is the *y* axis: the yaw rotation is about
  (0, 1, 0) and tilt(phi, theta) = Rx(phi) @ Rz(theta) maps a measured
  gravity direction onto (0, 1, 0).
- Row index v is measured in pixels from the top image row; the per-row
  exposure delay is v * readout seconds (row 0 exposed at the frame
  reference time).
- Quaternions are stored as (w, x, y, z).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

VERTICAL = np.array([0.0, 1.0, 0.0])

GRAVITY_NORM = 9.81


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == cross(v, u)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def rotation_yaw(psi: float) -> np.ndarray:
    """Rotation by psi about the vertical (y) axis."""
    c, s = np.cos(psi), np.sin(psi)
    return np.array([
        [c, 0.0, -s],
        [0.0, 1.0, 0.0],
        [s, 0.0, c],
    ])


def _rot_x(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([
        [1.0, 0.0, 0.0],
        [0.0, c, -s],
        [0.0, s, c],
    ])


def _rot_z(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [c, -s, 0.0],
        [s, c, 0.0],
        [0.0, 0.0, 1.0],
    ])


def rotation_tilt(phi: float, theta: float) -> np.ndarray:
    """Roll/pitch rotation Rx(phi) @ Rz(theta) that levels a camera frame."""
    return _rot_x(phi) @ _rot_z(theta)


def tilt_from_gravity(g) -> tuple[float, float]:
    """Angles (phi, theta) with rotation_tilt(phi, theta) @ g_hat == VERTICAL.

    Raises ValueError for a near-zero gravity vector.
    """
    g = np.asarray(g, dtype=float)
    n = np.linalg.norm(g)
    if not np.isfinite(n) or n < 1e-6:
        raise ValueError("degenerate gravity vector (norm < 1e-6)")
    gx, gy, gz = g / n
    theta = np.arctan2(gx, gy)
    h = np.hypot(gx, gy)
    phi = np.arctan2(-gz, h)
    return phi, theta


def readout_factor(w, v: float, readout: float) -> np.ndarray:
    """Linearized per-row rotation factor I + v*readout*[w]_x."""
    return np.eye(3) + (v * readout) * skew(w)


def essential_angular(R, t, w1, w2, v1, v2, readout) -> np.ndarray:
    """Rolling-shutter essential matrix for the angular-velocity-only model."""
    f1 = readout_factor(w1, v1, readout)
    f2 = readout_factor(w2, v2, readout)
    return f2.T @ np.asarray(R) @ f1 @ skew(t)


def essential_linear(R, t, d1, d2, v1, v2, readout) -> np.ndarray:
    """Rolling-shutter essential matrix for the linear-velocity-only model."""
    t = np.asarray(t, dtype=float)
    b = t - (v1 * readout) * np.asarray(d1, dtype=float) \
        + (v2 * readout) * np.asarray(d2, dtype=float)
    return np.asarray(R) @ skew(b)


def essential_uniform(R, t, d1, d2, w1, w2, v1, v2, readout) -> np.ndarray:
    """Rolling-shutter essential matrix with both velocity kinds."""
    t = np.asarray(t, dtype=float)
    b = t - (v1 * readout) * np.asarray(d1, dtype=float) \
        + (v2 * readout) * np.asarray(d2, dtype=float)
    f1 = readout_factor(w1, v1, readout)
    f2 = readout_factor(w2, v2, readout)
    return f2.T @ np.asarray(R) @ f1 @ skew(b)


# ---------------------------------------------------------------------------
# Quaternions (w, x, y, z)

def quat_multiply(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(R) -> np.ndarray:
    """Unit quaternion of a rotation matrix (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(R[i, i] - R[j, j] - R[k, k] + 1.0) * 2.0
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def quat_local_update(q, delta) -> np.ndarray:
    """Apply a 3-vector tangent increment to a unit quaternion.

    The increment is lifted to [cos|d|, sin(|d|)/|d| * d] and composed on
    the left; the result is renormalized.
    """
    delta = np.asarray(delta, dtype=float)
    a = np.linalg.norm(delta)
    if a < 1e-6:
        # series for sin(a)/a to avoid cancellation near zero
        sinc = 1.0 - a * a / 6.0
    else:
        sinc = np.sin(a) / a
    dq = np.concatenate(([np.cos(a)], sinc * delta))
    out = quat_multiply(dq, q)
    return out / np.linalg.norm(out)


@dataclass(frozen=True)
class Rotation:
    """Rotation stored as a unit quaternion (w, x, y, z)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or abs(n - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {n} too far from 1")
        object.__setattr__(self, "q", q / n)

    @property
    def matrix(self) -> np.ndarray:
        return quat_to_matrix(self.q)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]))

    @classmethod
    def from_matrix(cls, R) -> "Rotation":
        return cls(quat_from_matrix(R))

    def local_update(self, delta) -> "Rotation":
        return Rotation(quat_local_update(self.q, delta))


# ---------------------------------------------------------------------------
# Measurement / estimate containers

@dataclass(frozen=True)
class CameraIntrinsics:
    focal: float
    cx: float
    cy: float
    width: int
    height: int
    readout: float  # seconds per image row

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        if self.readout < 0:
            raise ValueError("readout time must be non-negative")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")


@dataclass(frozen=True)
class NormalizedPoint:
    """Homogeneous normalized image point (m[2] == 1) plus its image row."""

    m: np.ndarray
    row: float

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (3,) or abs(m[2] - 1.0) > 1e-12:
            raise ValueError("normalized point must have third component 1")
        object.__setattr__(self, "m", m)


@dataclass(frozen=True)
class Correspondence:
    p1: NormalizedPoint
    p2: NormalizedPoint


@dataclass(frozen=True)
class InertialMeasurement:
    """Gravity (m/s^2) and angular velocity (rad/s) in the camera frame."""

    gravity: np.ndarray
    angular_velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))
        object.__setattr__(self, "angular_velocity",
                           np.asarray(self.angular_velocity, dtype=float))

    @property
    def has_gravity(self) -> bool:
        n = np.linalg.norm(self.gravity)
        return bool(np.isfinite(n) and n > 1e-6)

    @property
    def gravity_plausible(self) -> bool:
        n = np.linalg.norm(self.gravity)
        return bool(abs(n - GRAVITY_NORM) <= 0.2 * GRAVITY_NORM)


@dataclass
class RelativePoseEstimate:
    """Solver unknowns: rotation, unit translation and per-frame velocities.

    d1/d2 share the unknown global scale of the unit-normalized translation;
    w1/w2 are in rad/s (taken from the IMU for the angular/uniform models).
    """

    rotation: Rotation
    translation: np.ndarray
    d1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w2: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.translation = np.asarray(self.translation, dtype=float)
        n = np.linalg.norm(self.translation)
        if abs(n - 1.0) > 1e-9:
            raise ValueError("translation must be unit norm")
        for name in ("d1", "d2", "w1", "w2"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))


def normalize_pixel(p, intrinsics: CameraIntrinsics) -> NormalizedPoint:
    """Pixel coordinates -> normalized camera coordinates with row index."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite pixel coordinates")
    if not (0 <= p[0] <= intrinsics.width and 0 <= p[1] <= intrinsics.height):
        warnings.warn(f"pixel {p} outside image bounds", stacklevel=2)
    m = np.array([(p[0] - intrinsics.cx) / intrinsics.focal,
                  (p[1] - intrinsics.cy) / intrinsics.focal,
                  1.0])
    return NormalizedPoint(m=m, row=float(p[1]))


def denormalize_point(m, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Normalized camera coordinates -> pixel coordinates."""
    m = np.asarray(m, dtype=float)
    return np.array([intrinsics.focal * m[0] / m[2] + intrinsics.cx,
                     intrinsics.focal * m[1] / m[2] + intrinsics.cy])
