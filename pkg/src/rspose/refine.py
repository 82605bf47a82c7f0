"""Nonlinear refinement of (q, t, d1, d2) on RANSAC inliers.

Minimizes the regularized Sampson energy by alternating two LM blocks:
the rolling-shutter essential matrix is linear in [t, d1, d2] once the
rotation is fixed, so the unknowns decouple naturally into the quaternion
and the translation/velocity stack. Measured angular velocities are part
of the problem statement and stay fixed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Correspondence,
    InertialMeasurement,
    RelativePoseEstimate,
    Rotation,
)
from .lm import levenberg_marquardt
from .solvers import SolverConfig

# cap for the +inf epipole sentinel so the residual vector stays finite
_SAMPSON_CLAMP = 1e6


@dataclass
class RefineConfig:
    lambda_t: float = 1.0
    lambda_d1: float = 1e-3
    lambda_d2: float = 1e-3
    max_outer_iterations: int = 20
    outer_tol: float = 1e-8
    inner: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if min(self.lambda_t, self.lambda_d1, self.lambda_d2) < 0:
            raise ValueError("regularization weights must be non-negative")
        if self.max_outer_iterations <= 0 or self.outer_tol <= 0:
            raise ValueError("outer loop settings must be positive")


class RefinementError(RuntimeError):
    """Energy increased across an outer iteration (implementation bug)."""


def _skew_batch(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


class _Batch:
    """Vectorized Sampson residuals over a fixed inlier set.

    Evaluates one rolling-shutter essential matrix per correspondence
    (each has its own row pair) as a single batched expression; the LM
    inner loops call this hundreds of times, so the per-point Python loop
    of the scalar path is too slow here.
    """

    def __init__(self, inliers: list[Correspondence],
                 w1: np.ndarray, w2: np.ndarray, readout: float):
        self.m1 = np.array([c.p1.m for c in inliers])
        self.m2 = np.array([c.p2.m for c in inliers])
        self.u1 = np.array([c.p1.row for c in inliers]) * readout
        self.u2 = np.array([c.p2.row for c in inliers]) * readout
        self.k1 = _skew_batch(w1)
        self.k2 = _skew_batch(w2)

    def sampson(self, R: np.ndarray, t: np.ndarray, d1: np.ndarray,
                d2: np.ndarray) -> np.ndarray:
        # F2^T R F1 expanded in the per-row delays u = v * readout
        M = (R[None, :, :]
             + self.u1[:, None, None] * (R @ self.k1)[None, :, :]
             + self.u2[:, None, None] * (self.k2.T @ R)[None, :, :]
             + (self.u1 * self.u2)[:, None, None]
             * (self.k2.T @ R @ self.k1)[None, :, :])
        b = t[None, :] - self.u1[:, None] * d1[None, :] \
            + self.u2[:, None] * d2[None, :]
        E = M @ _skew_batch(b)
        Em1 = np.einsum("nij,nj->ni", E, self.m1)
        m2E = np.einsum("ni,nij->nj", self.m2, E)
        num = np.abs(np.einsum("ni,ni->n", self.m2, Em1))
        den = np.sqrt(m2E[:, 0] ** 2 + m2E[:, 1] ** 2
                      + Em1[:, 0] ** 2 + Em1[:, 1] ** 2)
        safe = np.maximum(den, 1e-15)
        return np.where(den < 1e-15, _SAMPSON_CLAMP,
                        np.minimum(num / safe, _SAMPSON_CLAMP))


def _residual_vector(batch: _Batch, R: np.ndarray, t: np.ndarray,
                     d1: np.ndarray, d2: np.ndarray,
                     cfg: RefineConfig) -> np.ndarray:
    # works on raw components: the intermediate LM states deliberately
    # leave the unit-translation manifold (the penalty pulls them back)
    return np.concatenate([
        batch.sampson(R, t, d1, d2),
        [np.sqrt(cfg.lambda_t) * (np.linalg.norm(t) - 1.0),
         np.sqrt(cfg.lambda_d1) * np.linalg.norm(d1),
         np.sqrt(cfg.lambda_d2) * np.linalg.norm(d2)],
    ])


def energy(est: RelativePoseEstimate, inliers: list[Correspondence],
           imu1: InertialMeasurement, imu2: InertialMeasurement,
           readout: float, cfg: RefineConfig | None = None) -> float:
    """Sum of squared Sampson errors plus the regularization penalties."""
    if not inliers:
        raise ValueError("energy needs a non-empty inlier set")
    if cfg is None:
        cfg = RefineConfig()
    batch = _Batch(inliers, est.w1, est.w2, readout)
    r = _residual_vector(batch, est.rotation.matrix, est.translation,
                         est.d1, est.d2, cfg)
    return float(r @ r)


def refine(init: RelativePoseEstimate,
           inliers: list[Correspondence],
           imu1: InertialMeasurement,
           imu2: InertialMeasurement,
           readout: float,
           cfg: RefineConfig | None = None) -> RelativePoseEstimate:
    """Alternating minimization: rotation block first, then [t, d1, d2].

    Runs until the relative energy decrease falls below outer_tol or the
    iteration cap; the returned translation is renormalized to unit
    length with the velocities rescaled identically (the shared scale is
    unobservable).
    """
    if cfg is None:
        cfg = RefineConfig()
    if not inliers:
        raise ValueError("refine needs a non-empty inlier set")
    if len(inliers) < 9:
        warnings.warn("fewer than 9 inliers; refinement may be "
                      "under-constrained", stacklevel=2)
    inner = cfg.inner
    q = init.rotation.q
    x = np.concatenate([init.translation, init.d1, init.d2])
    w1, w2 = init.w1, init.w2
    batch = _Batch(inliers, w1, w2, readout)

    def res_of(qq, xx):
        return _residual_vector(batch, Rotation(qq).matrix, xx[:3],
                                xx[3:6], xx[6:9], cfg)

    r = res_of(q, x)
    prev = float(r @ r)
    for _ in range(cfg.max_outer_iterations):
        rot_res = levenberg_marquardt(
            lambda qq: res_of(qq, x), q, 3,
            plus=lambda qq, d: Rotation(qq).local_update(d).q,
            fd_step=1e-6, max_iterations=inner.max_lm_iterations,
            step_tol=inner.convergence_tol,
            initial_damping=inner.lm_initial_damping)
        q = rot_res.state

        vec_res = levenberg_marquardt(
            lambda xx: res_of(q, xx), x, 9,
            fd_step=1e-7, max_iterations=inner.max_lm_iterations,
            step_tol=inner.convergence_tol,
            initial_damping=inner.lm_initial_damping)
        x = vec_res.state

        r = res_of(q, x)
        cur = float(r @ r)
        if cur > prev * (1.0 + 1e-12) + 1e-15:
            raise RefinementError(
                f"energy increased from {prev:.6e} to {cur:.6e}")
        if prev - cur <= cfg.outer_tol * max(prev, 1e-300):
            prev = cur
            break
        prev = cur
    scale = np.linalg.norm(x[:3])
    if scale < 1e-12:
        raise RefinementError("refined translation collapsed to zero")
    return RelativePoseEstimate(rotation=Rotation(q),
                                translation=x[:3] / scale,
                                d1=x[3:6] / scale, d2=x[6:9] / scale,
                                w1=w1, w2=w2)
