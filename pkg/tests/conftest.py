"""Shared helpers: benchmark-style scenes and minimal point sets."""

from __future__ import annotations

import numpy as np

from rspose.coeffs import AlgorithmKind
from rspose.geometry import rotation_tilt, tilt_from_gravity
from rspose.sim import (
    SceneConfig,
    generate_correspondences,
    generate_scene,
    synth_imu,
)

# fixed oblique unit directions used by the synthetic tests
DIR_D = np.array([3.0, 1.0, 2.0]) / np.linalg.norm([3.0, 1.0, 2.0])
DIR_W = np.array([0.3, 0.5, -0.2]) / np.linalg.norm([0.3, 0.5, -0.2])


def benchmark_scene(algorithm: AlgorithmKind, seed: int,
                    d_mag: float = 1.0, w_mag: float = 1.0,
                    motion: str | None = None):
    """Noiseless scene matching an algorithm's motion model.

    Velocities follow the benchmark convention (d2 = -d1, w2 = -w1) with
    the channels the model ignores set to zero. Returns (scene, all
    correspondences, minimal subset, imu1, imu2).
    """
    if motion is None:
        motion = ("sideways" if algorithm is AlgorithmKind.ANGULAR3
                  else "forward")
    d = DIR_D * d_mag
    w = DIR_W * w_mag
    if algorithm is AlgorithmKind.LINEAR9:
        w = np.zeros(3)
    if algorithm.model == "angular":
        d = np.zeros(3)
    cfg = SceneConfig(seed=seed, motion=motion, d1=d, d2=-d, w1=w, w2=-w)
    scene = generate_scene(cfg)
    corrs = generate_correspondences(scene)
    imu1, imu2 = synth_imu(scene)
    rng = np.random.default_rng(seed + 1000)
    idx = rng.choice(len(corrs), algorithm.min_points, replace=False)
    subset = [corrs[i] for i in idx]
    return scene, corrs, subset, imu1, imu2


def true_yaw(scene, imu1, imu2) -> float:
    """Yaw angle psi with tilt2^T @ yaw(psi) @ tilt1 == R_gt."""
    t1 = rotation_tilt(*tilt_from_gravity(imu1.gravity))
    t2 = rotation_tilt(*tilt_from_gravity(imu2.gravity))
    m = t2 @ scene.relative_rotation @ t1.T
    return float(np.arctan2(m[2, 0], m[0, 0]))


def axis_angle(axis, angle_rad: float) -> np.ndarray:
    """Rotation matrix by Rodrigues' formula (test oracle)."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    k = np.array([[0.0, -a[2], a[1]],
                  [a[2], 0.0, -a[0]],
                  [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle_rad) * k \
        + (1.0 - np.cos(angle_rad)) * (k @ k)


def rot_err_deg(R1, R2) -> float:
    c = (np.trace(np.asarray(R1).T @ np.asarray(R2)) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def trans_err_deg(t1, t2) -> float:
    c = abs(float(np.dot(t1, t2))
            / (np.linalg.norm(t1) * np.linalg.norm(t2)))
    return float(np.degrees(np.arccos(np.clip(c, 0.0, 1.0))))
