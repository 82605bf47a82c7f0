"""Error metrics for relative pose evaluation."""

from __future__ import annotations

import numpy as np


def rotation_error(R_gt: np.ndarray, R_est: np.ndarray) -> float:
    """Geodesic rotation distance in degrees.

    arccos((trace(R_gt^T R_est) - 1) / 2), clamped into the valid arccos
    domain against rounding.
    """
    R_gt = np.asarray(R_gt, dtype=float)
    R_est = np.asarray(R_est, dtype=float)
    for R in (R_gt, R_est):
        if R.shape != (3, 3) or not np.allclose(R @ R.T, np.eye(3), atol=1e-6):
            raise ValueError("rotation_error expects orthonormal 3x3 inputs")
    c = (np.trace(R_gt.T @ R_est) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def translation_error(t_gt: np.ndarray, t_est: np.ndarray) -> float:
    """Angle between unit translation directions in degrees, sign-folded.

    The translation is recoverable only up to sign before the cheirality
    check, so the result is min(theta, 180 - theta).
    """
    t_gt = np.asarray(t_gt, dtype=float)
    t_est = np.asarray(t_est, dtype=float)
    n1, n2 = np.linalg.norm(t_gt), np.linalg.norm(t_est)
    if n1 < 1e-12 or n2 < 1e-12:
        raise ValueError("translation_error expects non-zero vectors")
    theta = np.degrees(np.arccos(np.clip(t_gt @ t_est / (n1 * n2), -1.0, 1.0)))
    return float(min(theta, 180.0 - theta))
