"""Stacked coefficient matrices A(rotation) for the five minimal algorithms.

Each epipolar constraint is exactly linear in the unknown vector
x = [t, d1, d2] (or x = t for the angular algorithms) because the
cross-product bracket of the essential matrix is linear in its argument.
A row is therefore the evaluation of the epipolar scalar on the canonical
basis of x, which collapses to the closed form

    m2^T R_r [b]_x m1 = b . (m1 x R_r^T m2)

with b the basis direction scaled by 1, -v1*readout or +v2*readout for the
t, d1 and d2 blocks respectively.

Conditioning: the physical d-columns carry the tiny factor v*readout
(~0.06 at the last row), which makes the determinant of the stacked
matrix vanish numerically everywhere. The built matrix therefore uses
equilibrated velocity unknowns d * readout * v_max (v_max the largest row
index in the set), recorded in CoefficientMatrix.d_column_scale, and
l2-normalized rows. The nullspace is unchanged up to that per-block
rescaling, which extract_translation undoes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import (
    Correspondence,
    InertialMeasurement,
    Rotation,
    readout_factor,
    rotation_tilt,
    rotation_yaw,
    tilt_from_gravity,
)


class AlgorithmKind(Enum):
    LINEAR9 = "linear9"
    ANGULAR5 = "angular5"
    ANGULAR3 = "angular3"
    UNIFORM11 = "uniform11"
    UNIFORM9 = "uniform9"

    @property
    def min_points(self) -> int:
        return {"linear9": 9, "angular5": 5, "angular3": 3,
                "uniform11": 11, "uniform9": 9}[self.value]

    @property
    def x_dim(self) -> int:
        return {"linear9": 9, "angular5": 3, "angular3": 3,
                "uniform11": 9, "uniform9": 9}[self.value]

    @property
    def uses_gravity(self) -> bool:
        return self in (AlgorithmKind.LINEAR9, AlgorithmKind.ANGULAR3,
                        AlgorithmKind.UNIFORM9)

    @property
    def uses_angular_velocity(self) -> bool:
        return self is not AlgorithmKind.LINEAR9

    @property
    def model(self) -> str:
        """Rolling-shutter motion model family: linear, angular or uniform."""
        if self is AlgorithmKind.LINEAR9:
            return "linear"
        if self in (AlgorithmKind.ANGULAR5, AlgorithmKind.ANGULAR3):
            return "angular"
        return "uniform"


@dataclass(frozen=True)
class Yaw:
    """Rotation hypothesis for the gravity-aided algorithms."""
    psi: float


@dataclass(frozen=True)
class Full:
    """Unconstrained rotation hypothesis."""
    rotation: Rotation


RotationHypothesis = Yaw | Full


@dataclass(frozen=True)
class CoefficientMatrix:
    entries: np.ndarray
    algorithm: AlgorithmKind
    # equilibration factor: internal d-unknowns are d * d_column_scale
    d_column_scale: float = 1.0

    def __post_init__(self):
        n, d = self.entries.shape
        if d != self.algorithm.x_dim:
            raise ValueError(f"expected {self.algorithm.x_dim} columns, got {d}")

    def residuals(self, x_physical) -> np.ndarray:
        """A times a physical [t, d1, d2] (or t) unknown vector."""
        x = np.asarray(x_physical, dtype=float).copy()
        if x.size == 9:
            x[3:] *= self.d_column_scale
        return self.entries @ x


class InsufficientPointsError(ValueError):
    pass


def full_rotation(hyp: RotationHypothesis,
                  imu1: InertialMeasurement,
                  imu2: InertialMeasurement) -> np.ndarray:
    """Rotation matrix implied by a hypothesis.

    A Yaw hypothesis is composed with the gravity-derived tilt of both
    frames: R = tilt2^T @ yaw(psi) @ tilt1.
    """
    if isinstance(hyp, Full):
        return hyp.rotation.matrix
    if not (imu1.has_gravity and imu2.has_gravity):
        raise ValueError("yaw hypothesis requires gravity in both frames")
    t1 = rotation_tilt(*tilt_from_gravity(imu1.gravity))
    t2 = rotation_tilt(*tilt_from_gravity(imu2.gravity))
    return t2.T @ rotation_yaw(hyp.psi) @ t1


def constraint_coefficients(corr: Correspondence,
                            algorithm: AlgorithmKind,
                            R_full: np.ndarray,
                            imu1: InertialMeasurement,
                            imu2: InertialMeasurement,
                            readout: float) -> np.ndarray:
    """Physical row r with r . x = m2^T E_r(R_full, x; w, v, readout) m1."""
    m1, v1 = corr.p1.m, corr.p1.row
    m2, v2 = corr.p2.m, corr.p2.row
    if algorithm.uses_angular_velocity:
        f1 = readout_factor(imu1.angular_velocity, v1, readout)
        f2 = readout_factor(imu2.angular_velocity, v2, readout)
        rr = f2.T @ R_full @ f1
    else:
        rr = R_full
    c = np.cross(m1, rr.T @ m2)
    if algorithm.model == "angular":
        return c
    return np.concatenate([c, (-v1 * readout) * c, (v2 * readout) * c])


class PreparedProblem:
    """Per-correspondence quantities that do not depend on the hypothesis.

    Used to evaluate the coefficient matrix cheaply inside the rotation
    optimization loop.
    """

    def __init__(self, corrs: list[Correspondence],
                 imu1: InertialMeasurement,
                 imu2: InertialMeasurement,
                 readout: float,
                 algorithm: AlgorithmKind):
        if len(corrs) < algorithm.min_points:
            raise InsufficientPointsError(
                f"{algorithm.value} needs {algorithm.min_points} points, "
                f"got {len(corrs)}")
        if algorithm.uses_gravity and not (imu1.has_gravity and imu2.has_gravity):
            raise ValueError(
                f"{algorithm.value} requires gravity measurements")
        self.algorithm = algorithm
        self.readout = readout
        self.imu1 = imu1
        self.imu2 = imu2
        self.m1 = np.array([c.p1.m for c in corrs])
        self.m2 = np.array([c.p2.m for c in corrs])
        self.v1 = np.array([c.p1.row for c in corrs])
        self.v2 = np.array([c.p2.row for c in corrs])
        if algorithm.uses_angular_velocity:
            # linearized per-row factors, stacked over correspondences
            k1 = _skew(imu1.angular_velocity)
            k2 = _skew(imu2.angular_velocity)
            self.f1t = (np.eye(3)[None, :, :]
                        + (self.v1 * readout)[:, None, None] * k1[None, :, :]
                        ).transpose(0, 2, 1)
            f2 = (np.eye(3)[None, :, :]
                  + (self.v2 * readout)[:, None, None] * k2[None, :, :])
            self.f2m2 = np.einsum("nij,nj->ni", f2, self.m2)
        else:
            self.f1t = None
            self.f2m2 = self.m2
        v_max = float(max(self.v1.max(), self.v2.max(), 1.0))
        self.d_column_scale = readout * v_max if readout > 0 else 1.0
        # row-delay factors in equilibrated units
        self._u1 = self.v1 * readout / self.d_column_scale
        self._u2 = self.v2 * readout / self.d_column_scale
        # Tilts are available whenever gravity was measured, even for
        # algorithms that do not constrain the rotation with it: the
        # gravity-free solvers still use the yaw family as an
        # initialization device.
        if imu1.has_gravity and imu2.has_gravity:
            self._tilt1 = rotation_tilt(*tilt_from_gravity(imu1.gravity))
            self._tilt2 = rotation_tilt(*tilt_from_gravity(imu2.gravity))
        else:
            self._tilt1 = self._tilt2 = None

    def rotation_of(self, hyp: RotationHypothesis) -> np.ndarray:
        if isinstance(hyp, Full):
            return hyp.rotation.matrix
        if self._tilt1 is None:
            raise ValueError(
                "yaw hypothesis requires gravity measurements in both views")
        return self._tilt2.T @ rotation_yaw(hyp.psi) @ self._tilt1

    def matrix(self, hyp: RotationHypothesis,
               normalize_rows: bool = True) -> CoefficientMatrix:
        R = self.rotation_of(hyp)
        y = self.f2m2 @ R  # row n: R^T @ f2m2[n]
        if self.f1t is not None:
            y = np.einsum("nij,nj->ni", self.f1t, y)
        c = np.cross(self.m1, y)
        if self.algorithm.model == "angular":
            rows = c
        else:
            rows = np.hstack([c, -self._u1[:, None] * c, self._u2[:, None] * c])
        if normalize_rows:
            norms = np.linalg.norm(rows, axis=1, keepdims=True)
            rows = rows / np.where(norms > 1e-10, norms, 1.0)
        return CoefficientMatrix(entries=rows,
                                 algorithm=self.algorithm,
                                 d_column_scale=self.d_column_scale)


def build_matrix(corrs: list[Correspondence],
                 hyp: RotationHypothesis,
                 imu1: InertialMeasurement,
                 imu2: InertialMeasurement,
                 readout: float,
                 algorithm: AlgorithmKind) -> CoefficientMatrix:
    """Stack one l2-normalized constraint row per correspondence.

    Raises InsufficientPointsError below the algorithm's minimal count and
    ValueError when a required inertial channel is missing.
    """
    if isinstance(hyp, Yaw) and not algorithm.uses_gravity:
        raise ValueError(f"{algorithm.value} does not take a yaw hypothesis")
    return PreparedProblem(corrs, imu1, imu2, readout, algorithm).matrix(hyp)


def _skew(v):
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
