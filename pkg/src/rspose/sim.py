"""Synthetic two-view rolling-shutter scene generation.

Forward model
-------------
All generated correspondences satisfy the rolling-shutter epipolar
constraint m2^T E_r m1 = 0 *exactly* (to rounding) with the ground-truth
parameters, where E_r is the uniform-model essential matrix

    E_r = F2(v2)^T R F1(v1) [t - v1*lam*d1 + v2*lam*d2]_x,
    Fi(v) = I + v*lam*[wi]_x.

Because the Fi factors are linearized (not orthonormal), no rigid
per-camera projection reproduces that operator ordering exactly. The
projection used here is the algebraically exact one:

    view 1:  m1 ~ x1 - v1*lam*d1                    (x1 in cam-1 row-0 frame)
    view 2:  m2 ~ F2(v2)^-1 R F1(v1)^-T (x1 - t - v2*lam*d2)

i.e. view 1 compensates only its center motion and the rotational readout
effect of both views is folded into the view-2 ray map. With zero
velocities both reduce to the rigid global-shutter projection.

Frames: d1 and d2 are expressed in the camera-1 row-0 frame, w1 in the
camera-1 frame, w2 in the camera-2 frame (as an IMU would measure them).
The world vertical is the +y axis, so the world gravity vector is
(0, 9.81, 0).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    GRAVITY_NORM,
    CameraIntrinsics,
    Correspondence,
    InertialMeasurement,
    NormalizedPoint,
    denormalize_point,
    normalize_pixel,
    readout_factor,
    rotation_yaw,
    _rot_x,
    _rot_z,
)

DEFAULT_INTRINSICS = CameraIntrinsics(
    focal=640.0, cx=960.0, cy=540.0, width=1920, height=1080, readout=60e-6)


def _euler_rotation(rx: float, ry: float, rz: float) -> np.ndarray:
    return _rot_x(rx) @ rotation_yaw(ry) @ _rot_z(rz)


@dataclass
class SceneConfig:
    n_points: int = 300
    mean_depth: float = 20.0
    baseline: float = 2.0
    max_orientation_deg: float = 20.0
    motion: str = "forward"  # or "sideways"
    d1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS
    seed: int = 0

    def __post_init__(self):
        if self.n_points <= 0 or self.mean_depth <= 0:
            raise ValueError("n_points and mean_depth must be positive")
        if abs(self.max_orientation_deg) > 90:
            raise ValueError("orientation range must be within 90 degrees")
        if self.motion not in ("forward", "sideways"):
            raise ValueError(f"unknown motion type {self.motion!r}")
        for name in ("d1", "d2", "w1", "w2"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass
class NoiseConfig:
    pixel_sigma: float = 0.0       # pixels
    gravity_angle_deg: float = 0.0  # per-axis perturbation of gravity
    angvel_angle_deg: float = 0.0   # direction perturbation of angular rate
    seed: int = 0

    def __post_init__(self):
        if min(self.pixel_sigma, self.gravity_angle_deg,
               self.angvel_angle_deg) < 0:
            raise ValueError("noise levels must be non-negative")


@dataclass
class SyntheticScene:
    points: np.ndarray          # (N, 3) world coordinates
    rot1: np.ndarray            # world-to-camera rotation at row 0
    center1: np.ndarray         # camera center in world coordinates
    rot2: np.ndarray
    center2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    intrinsics: CameraIntrinsics
    gravity_world: np.ndarray

    @property
    def relative_rotation(self) -> np.ndarray:
        return self.rot2 @ self.rot1.T

    @property
    def relative_translation(self) -> np.ndarray:
        """Camera-2 center in the camera-1 frame (x2 = R (x1 - t))."""
        return self.rot1 @ (self.center2 - self.center1)

    @property
    def unit_translation(self) -> np.ndarray:
        t = self.relative_translation
        return t / np.linalg.norm(t)


def generate_scene(cfg: SceneConfig) -> SyntheticScene:
    """Seeded-deterministic two-camera scene matching the benchmark setup."""
    rng = np.random.default_rng(cfg.seed)
    a = np.deg2rad(cfg.max_orientation_deg)
    rot1 = _euler_rotation(*rng.uniform(-a, a, size=3))
    rot2 = _euler_rotation(*rng.uniform(-a, a, size=3))
    center1 = np.zeros(3)
    direction = np.array([0.0, 0.0, 1.0]) if cfg.motion == "forward" \
        else np.array([1.0, 0.0, 0.0])
    center2 = cfg.baseline * direction + rng.normal(0.0, 0.05, size=3)
    depth_spread = 0.15 * cfg.mean_depth
    points = np.column_stack([
        rng.normal(0.0, 4.0, size=cfg.n_points),
        rng.normal(0.0, 2.5, size=cfg.n_points),
        rng.normal(cfg.mean_depth, depth_spread, size=cfg.n_points),
    ])
    return SyntheticScene(
        points=points, rot1=rot1, center1=center1, rot2=rot2, center2=center2,
        d1=cfg.d1.copy(), d2=cfg.d2.copy(), w1=cfg.w1.copy(), w2=cfg.w2.copy(),
        intrinsics=cfg.intrinsics,
        gravity_world=GRAVITY_NORM * np.array([0.0, 1.0, 0.0]))


def _fixed_point_row(direction_fn, intrinsics: CameraIntrinsics,
                     max_iterations: int = 50, tol: float = 1e-6):
    """Solve v = row(project(direction(v))) by fixed-point iteration.

    Returns (pixel, v, ray) or None when the point is behind the camera,
    projects out of bounds or the iteration does not converge.
    """
    v = 0.0
    d = direction_fn(0.0)
    if d[2] <= 1e-9:
        return None
    v = float(intrinsics.focal * d[1] / d[2] + intrinsics.cy)
    for _ in range(max_iterations):
        d = direction_fn(v)
        if d[2] <= 1e-9:
            return None
        v_new = float(intrinsics.focal * d[1] / d[2] + intrinsics.cy)
        if abs(v_new - v) < tol:
            v = v_new
            break
        v = v_new
    else:
        return None
    d = direction_fn(v)
    if d[2] <= 1e-9:
        return None
    pixel = denormalize_point(d, intrinsics)
    if not (0 <= pixel[0] < intrinsics.width and 0 <= pixel[1] < intrinsics.height):
        return None
    return pixel, v, d / d[2]


def project_rs(point_world, rot, center, d, w, intrinsics: CameraIntrinsics):
    """Rolling-shutter projection of a world point for a single camera.

    The row-v pose is the row-0 pose left-perturbed by the linearized
    rotation (I + v*lam*[w]_x) with the center displaced by v*lam*d (d in
    the camera row-0 frame). Returns (pixel, row) or None when culled.
    """
    x_ref = np.asarray(rot) @ (np.asarray(point_world, dtype=float)
                               - np.asarray(center, dtype=float))
    lam = intrinsics.readout
    d = np.asarray(d, dtype=float)
    w = np.asarray(w, dtype=float)
    rotating = np.any(w != 0.0)

    def direction(v):
        u = x_ref - (v * lam) * d
        if rotating:
            u = np.linalg.solve(readout_factor(w, v, lam), u)
        return u

    res = _fixed_point_row(direction, intrinsics)
    if res is None:
        return None
    pixel, v, _ = res
    return pixel, v


def _project_pair(scene: SyntheticScene, point_world):
    """Project one point into both views with the exact algebraic model.

    Returns ((pixel1, v1, m1), (pixel2, v2, m2)) or None when culled in
    either view.
    """
    intr = scene.intrinsics
    lam = intr.readout
    x1 = scene.rot1 @ (np.asarray(point_world, dtype=float) - scene.center1)
    res1 = _fixed_point_row(lambda v: x1 - (v * lam) * scene.d1, intr)
    if res1 is None:
        return None
    pixel1, v1, m1 = res1
    R = scene.relative_rotation
    t = scene.relative_translation
    f1_inv_t = np.linalg.inv(readout_factor(scene.w1, v1, lam)).T
    base = x1 - t

    def direction2(v):
        y = base - (v * lam) * scene.d2
        return np.linalg.solve(readout_factor(scene.w2, v, lam),
                               R @ (f1_inv_t @ y))

    res2 = _fixed_point_row(direction2, intr)
    if res2 is None:
        return None
    pixel2, v2, m2 = res2
    return (pixel1, v1, m1), (pixel2, v2, m2)


def generate_correspondences(scene: SyntheticScene) -> list[Correspondence]:
    """All scene points visible in both views, as exact correspondences."""
    corrs = []
    for p in scene.points:
        pair = _project_pair(scene, p)
        if pair is None:
            continue
        (_, v1, m1), (_, v2, m2) = pair
        corrs.append(Correspondence(
            p1=NormalizedPoint(m=m1, row=v1),
            p2=NormalizedPoint(m=m2, row=v2)))
    return corrs


def _small_euler_noise(rng, angle_deg: float) -> np.ndarray:
    """Rotation with each Euler angle uniform in +-angle_deg."""
    if angle_deg == 0.0:
        return np.eye(3)
    a = np.deg2rad(rng.uniform(-angle_deg, angle_deg, size=3))
    return _euler_rotation(*a)


def synth_imu(scene: SyntheticScene,
              extrinsic_rotation: np.ndarray | None = None,
              noise: NoiseConfig | None = None
              ) -> tuple[InertialMeasurement, InertialMeasurement]:
    """Camera-frame inertial measurements for both frames.

    Gravity and angular velocity are rotated into the IMU frame through
    the camera-to-IMU extrinsic rotation, perturbed there, and returned in
    camera coordinates. The gravity perturbations of the two frames are
    applied in opposite directions.
    """
    if extrinsic_rotation is None:
        extrinsic_rotation = np.eye(3)
    if noise is None:
        noise = NoiseConfig()
    rng = np.random.default_rng(noise.seed)
    ext = np.asarray(extrinsic_rotation)

    g1 = scene.rot1 @ scene.gravity_world
    g2 = scene.rot2 @ scene.gravity_world
    ng = _small_euler_noise(rng, noise.gravity_angle_deg)
    g1 = ext.T @ (ng @ (ext @ g1))
    g2 = ext.T @ (ng.T @ (ext @ g2))  # opposite-direction perturbation

    w1 = ext.T @ (_small_euler_noise(rng, noise.angvel_angle_deg) @ (ext @ scene.w1))
    w2 = ext.T @ (_small_euler_noise(rng, noise.angvel_angle_deg) @ (ext @ scene.w2))
    return (InertialMeasurement(gravity=g1, angular_velocity=w1),
            InertialMeasurement(gravity=g2, angular_velocity=w2))


def add_pixel_noise(corrs: list[Correspondence], pixel_sigma: float,
                    intrinsics: CameraIntrinsics, seed: int
                    ) -> list[Correspondence]:
    """Isotropic Gaussian pixel noise on both projections of each match."""
    if pixel_sigma == 0.0:
        return list(corrs)
    rng = np.random.default_rng(seed)
    noisy = []
    for c in corrs:
        p1 = denormalize_point(c.p1.m, intrinsics) + rng.normal(0, pixel_sigma, 2)
        p2 = denormalize_point(c.p2.m, intrinsics) + rng.normal(0, pixel_sigma, 2)
        with warnings.catch_warnings():
            # noise may push a pixel marginally out of bounds; keep it
            warnings.simplefilter("ignore")
            noisy.append(Correspondence(
                p1=normalize_pixel(p1, intrinsics),
                p2=normalize_pixel(p2, intrinsics)))
    return noisy


def add_outliers(corrs: list[Correspondence], fraction: float,
                 intrinsics: CameraIntrinsics, seed: int
                 ) -> tuple[list[Correspondence], np.ndarray]:
    """Replace a fraction of second-view points with uniform random pixels.

    Returns (corrupted correspondences, boolean inlier labels).
    """
    rng = np.random.default_rng(seed)
    n = len(corrs)
    n_out = int(round(fraction * n))
    idx = rng.choice(n, size=n_out, replace=False)
    labels = np.ones(n, dtype=bool)
    out = list(corrs)
    for i in idx:
        labels[i] = False
        pixel = rng.uniform([0, 0], [intrinsics.width - 1, intrinsics.height - 1])
        out[i] = Correspondence(p1=out[i].p1,
                                p2=normalize_pixel(pixel, intrinsics))
    return out, labels
