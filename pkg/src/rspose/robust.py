"""RANSAC over minimal samples with Sampson-distance inlier scoring.

The per-correspondence essential matrix is row-dependent (each match has
its own readout rows), so scoring evaluates the rolling-shutter essential
matrix of every correspondence individually.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import AlgorithmKind, InsufficientPointsError
from .geometry import (
    Correspondence,
    InertialMeasurement,
    RelativePoseEstimate,
    essential_angular,
    essential_linear,
    essential_uniform,
)
from .solvers import (
    DegenerateConfigurationError,
    SolverConfig,
    SolverOutput,
    estimate_minimal,
)


@dataclass
class RansacConfig:
    """Sampling and scoring parameters.

    threshold_px is expressed in pixels and divided by the focal length to
    reach normalized coordinates, where the Sampson error lives.
    """

    threshold_px: float = 1.0
    focal: float = 640.0
    max_iterations: int = 1000
    confidence: float = 0.999
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        if self.threshold_px <= 0 or self.focal <= 0:
            raise ValueError("threshold and focal length must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")

    @property
    def threshold(self) -> float:
        """Inlier threshold in normalized image coordinates."""
        return self.threshold_px / self.focal


@dataclass
class RansacResult:
    best: SolverOutput
    inlier_mask: np.ndarray
    iterations_run: int


def sampson_error(E: np.ndarray, m1: np.ndarray, m2: np.ndarray) -> float:
    """First-order geometric distance to the epipolar constraint.

    Returns |m2^T E m1| / sqrt((m2^T E)_0^2 + (m2^T E)_1^2 + (E m1)_0^2 +
    (E m1)_1^2), or +inf when the denominator vanishes (point at the
    epipole, where the Sampson linearization is undefined).
    """
    E = np.asarray(E, dtype=float)
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    num = float(m2 @ E @ m1)
    left = m2 @ E
    right = E @ m1
    den = np.hypot(np.hypot(left[0], left[1]), np.hypot(right[0], right[1]))
    if den < 1e-15:
        return float("inf")
    return abs(num) / den


def _per_point_essential(est: RelativePoseEstimate, corr: Correspondence,
                         readout: float,
                         algorithm: AlgorithmKind) -> np.ndarray:
    R = est.rotation.matrix
    v1, v2 = corr.p1.row, corr.p2.row
    if algorithm.model == "angular":
        return essential_angular(R, est.translation, est.w1, est.w2,
                                 v1, v2, readout)
    if algorithm.model == "linear":
        return essential_linear(R, est.translation, est.d1, est.d2,
                                v1, v2, readout)
    return essential_uniform(R, est.translation, est.d1, est.d2,
                             est.w1, est.w2, v1, v2, readout)


def score_model(est: RelativePoseEstimate,
                corrs: list[Correspondence],
                imu1: InertialMeasurement,
                imu2: InertialMeasurement,
                readout: float,
                algorithm: AlgorithmKind,
                threshold: float) -> tuple[np.ndarray, float]:
    """Inlier mask and score for one hypothesis.

    The score is the inlier count plus a truncated-error tiebreak in
    [0, 1): among models with equal counts, the one with smaller summed
    inlier error wins.
    """
    errors = np.array([
        sampson_error(_per_point_essential(est, c, readout, algorithm),
                      c.p1.m, c.p2.m)
        for c in corrs])
    mask = errors < threshold
    n = int(mask.sum())
    if n == 0:
        return mask, 0.0
    mean_err = float(errors[mask].mean()) / threshold  # in [0, 1)
    return mask, n + (1.0 - mean_err) * 0.999 / max(len(corrs), 1)


def _adaptive_limit(inlier_ratio: float, sample_size: int,
                    confidence: float) -> float:
    if inlier_ratio <= 0.0:
        return float("inf")
    w_k = inlier_ratio ** sample_size
    if w_k >= 1.0:
        return 1.0
    return np.log1p(-confidence) / np.log1p(-w_k)


def ransac_estimate(algorithm: AlgorithmKind,
                    corrs: list[Correspondence],
                    imu1: InertialMeasurement,
                    imu2: InertialMeasurement,
                    readout: float,
                    cfg: RansacConfig | None = None,
                    solver_cfg: SolverConfig | None = None) -> RansacResult:
    """Seeded-deterministic RANSAC around the minimal solvers.

    Degenerate minimal samples are skipped without counting against the
    adaptive termination bound. Per-iteration RNG streams are derived by
    counter-based seeding so results do not depend on evaluation order.
    """
    if cfg is None:
        cfg = RansacConfig()
    if solver_cfg is None:
        solver_cfg = SolverConfig()
    k = algorithm.min_points
    if len(corrs) < k:
        raise InsufficientPointsError(
            f"{algorithm.value} needs at least {k} correspondences, "
            f"got {len(corrs)}")

    best_output = None
    best_mask = None
    best_score = -1.0
    n = len(corrs)
    iterations = 0
    failures = []
    limit = float(cfg.max_iterations)
    while iterations < limit and iterations < cfg.max_iterations:
        rng = np.random.default_rng([cfg.seed, iterations])
        idx = rng.choice(n, size=k, replace=False)
        iterations += 1
        sample = [corrs[i] for i in idx]
        try:
            out = estimate_minimal(algorithm, sample, imu1, imu2, readout,
                                   solver_cfg)
        except (DegenerateConfigurationError, np.linalg.LinAlgError) as exc:
            failures.append(str(exc))
            continue
        mask, score = score_model(out.estimate, corrs, imu1, imu2,
                                  readout, algorithm, cfg.threshold)
        if score > best_score:
            best_score = score
            best_output = out
            best_mask = mask
            limit = min(cfg.max_iterations,
                        _adaptive_limit(mask.mean(), k, cfg.confidence))
    if best_output is None:
        raise DegenerateConfigurationError(
            "all RANSAC samples were degenerate; last error: "
            + (failures[-1] if failures else "none recorded"))
    return RansacResult(best=best_output, inlier_mask=best_mask,
                        iterations_run=iterations)
