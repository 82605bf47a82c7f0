"""Rotation and translation error metrics."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import axis_angle
from rspose.metrics import rotation_error, translation_error


class TestRotationError:
    def test_identical_rotations_give_zero(self):
        R = axis_angle([1, 1, 0], 0.7)
        assert rotation_error(R, R) == pytest.approx(0.0, abs=1e-7)

    def test_quarter_turn_gives_ninety(self):
        for axis in ([1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 2, 3]):
            R = axis_angle(axis, np.pi / 2)
            assert rotation_error(np.eye(3), R) == pytest.approx(90.0,
                                                                 abs=1e-9)

    @given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
        lambda a: np.linalg.norm(a) > 1e-2),
        st.floats(0.01, np.pi - 0.01))
    def test_axis_angle_construction_oracle(self, axis, angle):
        base = axis_angle([0.3, -1.0, 0.7], 0.5)
        other = base @ axis_angle(axis, angle)
        assert rotation_error(base, other) == pytest.approx(
            np.degrees(angle), abs=1e-9)

    def test_symmetric(self):
        a = axis_angle([1, 0, 2], 0.4)
        b = axis_angle([0, 1, -1], 1.1)
        assert rotation_error(a, b) == pytest.approx(rotation_error(b, a))

    def test_bounded_by_180(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = axis_angle(rng.normal(size=3), rng.uniform(-np.pi, np.pi))
            b = axis_angle(rng.normal(size=3), rng.uniform(-np.pi, np.pi))
            assert 0.0 <= rotation_error(a, b) <= 180.0

    def test_rejects_non_rotation_input(self):
        with pytest.raises(ValueError):
            rotation_error(np.eye(3), 2.0 * np.eye(3))


class TestTranslationError:
    def test_equal_vectors_give_zero(self):
        t = np.array([0.0, 0.6, 0.8])
        assert translation_error(t, t) == pytest.approx(0.0, abs=1e-9)

    def test_antiparallel_folds_to_zero(self):
        t = np.array([0.0, 0.6, 0.8])
        assert translation_error(t, -t) == pytest.approx(0.0, abs=1e-9)

    def test_orthogonal_gives_ninety(self):
        assert translation_error([1, 0, 0], [0, 1, 0]) == pytest.approx(90.0)

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            translation_error([0, 0, 0], [1, 0, 0])

    @given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
        lambda a: np.linalg.norm(a) > 1e-2),
        st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
        lambda a: np.linalg.norm(a) > 1e-2))
    def test_folded_range(self, a, b):
        e = translation_error(np.array(a), np.array(b))
        assert 0.0 <= e <= 90.0 + 1e-9
