"""Synthetic scene generation, projection, IMU synthesis, noise."""

import numpy as np
import pytest

from conftest import DIR_D, DIR_W
from rspose.geometry import denormalize_point, essential_uniform
from rspose.sim import (
    NoiseConfig,
    SceneConfig,
    add_outliers,
    add_pixel_noise,
    generate_correspondences,
    generate_scene,
    project_rs,
    synth_imu,
)


def _uniform_scene(seed=0, d_mag=1.0, w_mag=1.0, motion="forward"):
    d = DIR_D * d_mag
    w = DIR_W * w_mag
    return generate_scene(SceneConfig(seed=seed, motion=motion,
                                      d1=d, d2=-d, w1=w, w2=-w))


class TestSceneGeneration:
    def test_same_seed_reproduces_scene(self):
        a = _uniform_scene(seed=5)
        b = _uniform_scene(seed=5)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.rot1, b.rot1)
        np.testing.assert_array_equal(a.center2, b.center2)

    def test_most_points_visible_in_both_views(self):
        scene = _uniform_scene(seed=1)
        corrs = generate_correspondences(scene)
        assert len(corrs) >= 0.8 * len(scene.points)

    def test_baseline_magnitude(self):
        for seed in range(5):
            scene = _uniform_scene(seed=seed)
            assert np.linalg.norm(scene.relative_translation) == \
                pytest.approx(2.0, rel=0.6)

    def test_zero_velocity_scene_is_global_shutter_instance(self):
        scene = _uniform_scene(seed=2, d_mag=0.0, w_mag=0.0)
        corrs = generate_correspondences(scene)
        R = scene.relative_rotation
        t = scene.relative_translation
        for c in corrs[:20]:
            E = R @ np.array([[0, -t[2], t[1]],
                              [t[2], 0, -t[0]],
                              [-t[1], t[0], 0]])
            assert abs(c.p2.m @ E @ c.p1.m) < 1e-10

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            SceneConfig(n_points=0)
        with pytest.raises(ValueError):
            SceneConfig(motion="diagonal")
        with pytest.raises(ValueError):
            SceneConfig(max_orientation_deg=120.0)


class TestForwardModelConsistency:
    def test_epipolar_residual_below_1e10(self):
        scene = _uniform_scene(seed=3)
        corrs = generate_correspondences(scene)
        R = scene.relative_rotation
        t = scene.relative_translation
        lam = scene.intrinsics.readout
        assert len(corrs) > 100
        for c in corrs:
            E = essential_uniform(R, t, scene.d1, scene.d2,
                                  scene.w1, scene.w2,
                                  c.p1.row, c.p2.row, lam)
            assert abs(c.p2.m @ E @ c.p1.m) < 1e-10

    def test_row_index_matches_pixel_row(self):
        scene = _uniform_scene(seed=4)
        corrs = generate_correspondences(scene)
        for c in corrs[:30]:
            p1 = denormalize_point(c.p1.m, scene.intrinsics)
            assert p1[1] == pytest.approx(c.p1.row, abs=1e-6)


class TestProjection:
    def test_static_projection_reduces_to_global_shutter(self):
        scene = _uniform_scene(seed=5, d_mag=0.0, w_mag=0.0)
        intr = scene.intrinsics
        p = scene.points[0]
        res = project_rs(p, scene.rot1, scene.center1,
                         np.zeros(3), np.zeros(3), intr)
        assert res is not None
        pixel, row = res
        x = scene.rot1 @ (p - scene.center1)
        expected = np.array([intr.focal * x[0] / x[2] + intr.cx,
                             intr.focal * x[1] / x[2] + intr.cy])
        np.testing.assert_allclose(pixel, expected, atol=1e-9)
        assert row == pytest.approx(expected[1], abs=1e-6)

    def test_point_behind_camera_is_culled(self):
        scene = _uniform_scene(seed=6)
        behind = scene.center1 - scene.rot1.T @ np.array([0.0, 0.0, 5.0])
        assert project_rs(behind, scene.rot1, scene.center1,
                          np.zeros(3), np.zeros(3),
                          scene.intrinsics) is None


class TestImuSynthesis:
    def test_zero_noise_measurements_match_ground_truth(self):
        scene = _uniform_scene(seed=7)
        imu1, imu2 = synth_imu(scene)
        np.testing.assert_allclose(imu1.gravity,
                                   scene.rot1 @ scene.gravity_world,
                                   atol=1e-12)
        np.testing.assert_allclose(imu2.gravity,
                                   scene.rot2 @ scene.gravity_world,
                                   atol=1e-12)
        np.testing.assert_allclose(imu1.angular_velocity, scene.w1,
                                   atol=1e-12)
        np.testing.assert_allclose(imu2.angular_velocity, scene.w2,
                                   atol=1e-12)

    def test_gravity_norm_is_physical(self):
        scene = _uniform_scene(seed=8)
        imu1, _ = synth_imu(scene)
        assert np.linalg.norm(imu1.gravity) == pytest.approx(9.81, abs=1e-9)

    def test_gravity_noise_angle_is_bounded(self):
        scene = _uniform_scene(seed=9)
        for seed in range(20):
            imu1, imu2 = synth_imu(
                scene, noise=NoiseConfig(gravity_angle_deg=1.0, seed=seed))
            for imu, rot in ((imu1, scene.rot1), (imu2, scene.rot2)):
                g_true = rot @ scene.gravity_world
                c = imu.gravity @ g_true / (
                    np.linalg.norm(imu.gravity) * np.linalg.norm(g_true))
                ang = np.degrees(np.arccos(np.clip(c, -1, 1)))
                assert ang <= np.sqrt(3.0) * 1.0 + 1e-6

    def test_extrinsic_rotation_round_trip(self):
        # perturbation-free measurements are extrinsic-invariant (the
        # quantity is mapped to the IMU frame and straight back)
        scene = _uniform_scene(seed=10)
        c, s = np.cos(0.3), np.sin(0.3)
        ext = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        a1, a2 = synth_imu(scene)
        b1, b2 = synth_imu(scene, extrinsic_rotation=ext)
        np.testing.assert_allclose(a1.gravity, b1.gravity, atol=1e-12)
        np.testing.assert_allclose(a2.angular_velocity, b2.angular_velocity,
                                   atol=1e-12)


class TestPixelNoise:
    def test_zero_sigma_is_identity(self):
        scene = _uniform_scene(seed=11)
        corrs = generate_correspondences(scene)
        noisy = add_pixel_noise(corrs, 0.0, scene.intrinsics, seed=1)
        assert all(n is c for n, c in zip(noisy, corrs))

    def test_empirical_standard_deviation(self):
        scene = _uniform_scene(seed=12)
        corrs = generate_correspondences(scene)
        # repeat over seeds to collect >= 1e4 displacement samples
        devs = []
        for seed in range(40):
            noisy = add_pixel_noise(corrs, 0.5, scene.intrinsics, seed)
            for c, n in zip(corrs, noisy):
                p = denormalize_point(c.p1.m, scene.intrinsics)
                q = denormalize_point(n.p1.m, scene.intrinsics)
                devs.extend(q - p)
        devs = np.array(devs)
        assert len(devs) > 1e4
        assert np.std(devs) == pytest.approx(0.5, rel=0.05)

    def test_noise_seed_deterministic(self):
        scene = _uniform_scene(seed=13)
        corrs = generate_correspondences(scene)
        a = add_pixel_noise(corrs, 0.5, scene.intrinsics, 3)
        b = add_pixel_noise(corrs, 0.5, scene.intrinsics, 3)
        for ca, cb in zip(a, b):
            np.testing.assert_array_equal(ca.p1.m, cb.p1.m)
            np.testing.assert_array_equal(ca.p2.m, cb.p2.m)

    def test_negative_noise_levels_rejected(self):
        with pytest.raises(ValueError):
            NoiseConfig(pixel_sigma=-0.1)


class TestOutliers:
    def test_fraction_and_labels(self):
        scene = _uniform_scene(seed=14)
        corrs = generate_correspondences(scene)
        out, labels = add_outliers(corrs, 0.3, scene.intrinsics, seed=2)
        assert len(out) == len(corrs)
        assert (~labels).sum() == round(0.3 * len(corrs))
        for c, o, keep in zip(corrs, out, labels):
            assert o.p1 is c.p1
            if keep:
                assert o.p2 is c.p2
