"""Coefficient-matrix construction for the five minimal solvers."""

import numpy as np
import pytest

from conftest import benchmark_scene, true_yaw
from rspose.coeffs import (
    AlgorithmKind,
    Full,
    InsufficientPointsError,
    Yaw,
    build_matrix,
    full_rotation,
)
from rspose.geometry import (
    InertialMeasurement,
    Rotation,
    essential_angular,
    essential_linear,
    essential_uniform,
)

ALL = list(AlgorithmKind)

TABLE = {  # minimal point count, unknown dimension
    AlgorithmKind.LINEAR9: (9, 9),
    AlgorithmKind.ANGULAR5: (5, 3),
    AlgorithmKind.ANGULAR3: (3, 3),
    AlgorithmKind.UNIFORM11: (11, 9),
    AlgorithmKind.UNIFORM9: (9, 9),
}


def _hypothesis_for(algorithm, scene, imu1, imu2):
    if algorithm.uses_gravity:
        return Yaw(true_yaw(scene, imu1, imu2))
    return Full(Rotation.from_matrix(scene.relative_rotation))


class TestAlgorithmTable:
    @pytest.mark.parametrize("algorithm", ALL)
    def test_point_count_and_dimension(self, algorithm):
        n, d = TABLE[algorithm]
        assert algorithm.min_points == n
        assert algorithm.x_dim == d

    def test_gravity_and_angular_velocity_usage(self):
        assert {a for a in ALL if a.uses_gravity} == {
            AlgorithmKind.LINEAR9, AlgorithmKind.ANGULAR3,
            AlgorithmKind.UNIFORM9}
        assert {a for a in ALL if not a.uses_angular_velocity} == {
            AlgorithmKind.LINEAR9}


class TestMatrixShape:
    @pytest.mark.parametrize("algorithm", ALL)
    def test_shape_matches_algorithm(self, algorithm):
        scene, _, subset, imu1, imu2 = benchmark_scene(algorithm, seed=1)
        hyp = _hypothesis_for(algorithm, scene, imu1, imu2)
        A = build_matrix(subset, hyp, imu1, imu2,
                         scene.intrinsics.readout, algorithm)
        assert A.entries.shape == TABLE[algorithm]

    def test_insufficient_points_raises(self):
        scene, _, subset, imu1, imu2 = benchmark_scene(
            AlgorithmKind.UNIFORM9, seed=1)
        with pytest.raises(InsufficientPointsError):
            build_matrix(subset[:8], Full(Rotation.identity()), imu1, imu2,
                         scene.intrinsics.readout, AlgorithmKind.UNIFORM9)

    def test_yaw_hypothesis_needs_gravity(self):
        scene, _, subset, imu1, imu2 = benchmark_scene(
            AlgorithmKind.ANGULAR3, seed=1)
        no_g = InertialMeasurement(gravity=np.zeros(3),
                                   angular_velocity=imu1.angular_velocity)
        with pytest.raises(ValueError):
            build_matrix(subset, Yaw(0.1), no_g, imu2,
                         scene.intrinsics.readout, AlgorithmKind.ANGULAR3)

    def test_yaw_hypothesis_rejected_for_full_rotation_solver(self):
        scene, _, subset, imu1, imu2 = benchmark_scene(
            AlgorithmKind.ANGULAR5, seed=1)
        with pytest.raises(ValueError):
            build_matrix(subset, Yaw(0.1), imu1, imu2,
                         scene.intrinsics.readout, AlgorithmKind.ANGULAR5)


class TestRowSemantics:
    """Each row evaluated on x equals the epipolar scalar m2^T E m1."""

    @pytest.mark.parametrize("algorithm", ALL)
    def test_row_times_x_equals_epipolar_form(self, algorithm):
        scene, _, subset, imu1, imu2 = benchmark_scene(algorithm, seed=2)
        lam = scene.intrinsics.readout
        rng = np.random.default_rng(7)
        R = scene.relative_rotation
        hyp = Full(Rotation.from_matrix(R)) \
            if not algorithm.uses_gravity \
            else Yaw(true_yaw(scene, imu1, imu2))
        if algorithm.uses_gravity:
            R = full_rotation(hyp, imu1, imu2)
        A = build_matrix(subset, hyp, imu1, imu2, lam, algorithm)
        for _ in range(5):
            x = rng.normal(size=algorithm.x_dim)
            got = A.residuals(x)
            for i, c in enumerate(subset):
                if algorithm.model == "angular":
                    E = essential_angular(R, x[:3], imu1.angular_velocity,
                                          imu2.angular_velocity,
                                          c.p1.row, c.p2.row, lam)
                elif algorithm.model == "linear":
                    E = essential_linear(R, x[:3], x[3:6], x[6:9],
                                         c.p1.row, c.p2.row, lam)
                else:
                    E = essential_uniform(R, x[:3], x[3:6], x[6:9],
                                          imu1.angular_velocity,
                                          imu2.angular_velocity,
                                          c.p1.row, c.p2.row, lam)
                expected = c.p2.m @ E @ c.p1.m
                # rows are l2-normalized; compare up to the row scale
                norm = _row_norm(subset, hyp, imu1, imu2, lam, algorithm, i)
                assert got[i] == pytest.approx(expected / norm, abs=1e-10)

    @pytest.mark.parametrize("algorithm", ALL)
    def test_exact_linearity(self, algorithm):
        scene, _, subset, imu1, imu2 = benchmark_scene(algorithm, seed=3)
        hyp = _hypothesis_for(algorithm, scene, imu1, imu2)
        A = build_matrix(subset, hyp, imu1, imu2,
                         scene.intrinsics.readout, algorithm)
        rng = np.random.default_rng(11)
        x, xp = rng.normal(size=algorithm.x_dim), rng.normal(
            size=algorithm.x_dim)
        alpha = 1.7
        lhs = A.residuals(alpha * x + xp)
        rhs = alpha * A.residuals(x) + A.residuals(xp)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def _row_norm(subset, hyp, imu1, imu2, lam, algorithm, i):
    # normalization factor, recovered from the un-normalized matrix
    from rspose.coeffs import PreparedProblem
    prep = PreparedProblem(subset, imu1, imu2, lam, algorithm)
    un = prep.matrix(hyp, normalize_rows=False).entries
    return float(np.linalg.norm(un[i]))


class TestNullVectorAtTruth:
    @pytest.mark.parametrize("algorithm", ALL)
    def test_true_unknowns_are_in_nullspace(self, algorithm):
        scene, _, subset, imu1, imu2 = benchmark_scene(algorithm, seed=4)
        hyp = _hypothesis_for(algorithm, scene, imu1, imu2)
        A = build_matrix(subset, hyp, imu1, imu2,
                         scene.intrinsics.readout, algorithm)
        if algorithm.x_dim == 9:
            x_true = np.concatenate([scene.relative_translation,
                                     scene.d1, scene.d2])
        else:
            x_true = scene.relative_translation
        np.testing.assert_allclose(A.residuals(x_true), 0.0, atol=1e-10)

    @pytest.mark.parametrize("algorithm", ALL)
    def test_smallest_singular_value_vanishes_at_truth(self, algorithm):
        scene, _, subset, imu1, imu2 = benchmark_scene(algorithm, seed=5)
        hyp = _hypothesis_for(algorithm, scene, imu1, imu2)
        A = build_matrix(subset, hyp, imu1, imu2,
                         scene.intrinsics.readout, algorithm)
        s = np.linalg.svd(A.entries, compute_uv=False)
        assert s[-1] / s[0] < 1e-9

    def test_angular3_determinant_vanishes_at_true_yaw(self):
        scene, _, subset, imu1, imu2 = benchmark_scene(
            AlgorithmKind.ANGULAR3, seed=6)
        A = build_matrix(subset, Yaw(true_yaw(scene, imu1, imu2)),
                         imu1, imu2, scene.intrinsics.readout,
                         AlgorithmKind.ANGULAR3)
        assert abs(np.linalg.det(A.entries)) < 1e-10

    def test_global_shutter_reduction_of_uniform9(self):
        scene, _, subset, imu1, imu2 = benchmark_scene(
            AlgorithmKind.UNIFORM9, seed=7, d_mag=0.0, w_mag=0.0)
        A = build_matrix(subset, Yaw(true_yaw(scene, imu1, imu2)),
                         imu1, imu2, scene.intrinsics.readout,
                         AlgorithmKind.UNIFORM9)
        x = np.concatenate([scene.relative_translation, np.zeros(6)])
        np.testing.assert_allclose(A.residuals(x), 0.0, atol=1e-10)


class TestRowScaleInvariance:
    def test_normalized_rows_are_unit_length(self):
        scene, _, subset, imu1, imu2 = benchmark_scene(
            AlgorithmKind.UNIFORM9, seed=8)
        hyp = Yaw(true_yaw(scene, imu1, imu2))
        A = build_matrix(subset, hyp, imu1, imu2,
                         scene.intrinsics.readout, AlgorithmKind.UNIFORM9)
        np.testing.assert_allclose(np.linalg.norm(A.entries, axis=1), 1.0,
                                   atol=1e-12)
