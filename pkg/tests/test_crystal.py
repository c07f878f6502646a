"""Geometry of the four orientation classes and frame transforms."""

import numpy as np
import pytest

from nvspinmech import (NV_AXES, TETRAHEDRAL_ANGLE, AngularState,
                        CrystalOrientation, FieldVector, angular_state,
                        field_in_nv_frame, nv_frame_matrix, rotate_about_axis)

DEG = np.pi / 180.0


class TestAxes:
    def test_unit_norm(self):
        assert np.allclose(np.linalg.norm(NV_AXES, axis=1), 1.0, atol=1e-15)

    def test_pairwise_tetrahedral_angle(self):
        for i in range(4):
            for j in range(i + 1, 4):
                cos = NV_AXES[i] @ NV_AXES[j]
                assert cos == pytest.approx(-1.0 / 3.0, abs=1e-15)
        assert TETRAHEDRAL_ANGLE == pytest.approx(109.47 * DEG, abs=1e-3)

    def test_tetrahedral_symmetry_permutes_axes(self):
        # 120 degrees about any axis maps the other three onto each other
        rot = CrystalOrientation.from_axis_angle(NV_AXES[0], 2 * np.pi / 3)
        mapped = (rot.rotation @ NV_AXES.T).T
        for axis in mapped:
            match = np.max(NV_AXES @ axis)
            assert match == pytest.approx(1.0, abs=1e-12)


class TestOrientation:
    def test_rejects_improper_rotation(self):
        with pytest.raises(ValueError, match="proper"):
            CrystalOrientation(np.diag([1.0, 1.0, -1.0]))

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError, match="orthogonal"):
            CrystalOrientation(np.eye(3) + 1e-6)

    def test_full_turn_is_identity(self):
        rng = np.random.default_rng(11)
        start = CrystalOrientation.identity()
        for _ in range(5):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            turned = rotate_about_axis(start, 2.0 * np.pi, axis)
            assert np.allclose(turned.axes_lab, start.axes_lab, atol=1e-12)

    def test_rotation_composition(self):
        axis = np.array([0.0, 0.0, 1.0])
        a = rotate_about_axis(CrystalOrientation.identity(), 0.3, axis)
        b = rotate_about_axis(a, 0.5, axis)
        direct = rotate_about_axis(CrystalOrientation.identity(), 0.8, axis)
        assert np.allclose(b.rotation, direct.rotation, atol=1e-13)

    def test_inverse_round_trip(self):
        axis = np.array([1.0, 0.0, 0.0])
        fwd = rotate_about_axis(CrystalOrientation.identity(), 0.7, axis)
        back = rotate_about_axis(fwd, -0.7, axis)
        assert np.allclose(back.rotation, np.eye(3), atol=1e-13)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError, match="unit"):
            rotate_about_axis(CrystalOrientation.identity(), 0.1, (1.0, 1.0, 0.0))


class TestFieldTransforms:
    def test_aligned_class_sees_axial_field(self):
        ori = CrystalOrientation.identity()
        b = FieldVector.from_array(0.1 * NV_AXES[0], frame="lab")
        b_nv = field_in_nv_frame(ori, 0, b)
        assert b_nv.frame == "nv"
        assert b_nv.bz == pytest.approx(0.1, rel=1e-14)
        assert abs(b_nv.bx) < 1e-16 and abs(b_nv.by) < 1e-16

    def test_other_class_sees_tetrahedral_projection(self):
        ori = CrystalOrientation.identity()
        b = FieldVector.from_array(0.09 * NV_AXES[0], frame="lab")
        b_nv = field_in_nv_frame(ori, 1, b)
        assert b_nv.bz == pytest.approx(-0.03, rel=1e-12)  # |B| cos(109.47deg)
        # transverse convention puts the projection along +x
        assert b_nv.bx == pytest.approx(0.09 * np.sqrt(1 - 1/9), rel=1e-12)
        assert abs(b_nv.by) < 1e-16

    def test_round_trip_preserves_vector(self):
        rng = np.random.default_rng(5)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        ori = CrystalOrientation.from_axis_angle(axis, 0.9)
        for _ in range(10):
            vec = rng.normal(scale=0.2, size=3)
            b = FieldVector.from_array(vec, frame="lab")
            for c in range(4):
                frame = nv_frame_matrix(ori, c, vec)
                # orthonormal frame: transforming back recovers the vector
                assert np.allclose(frame.T @ (frame @ vec), vec, atol=1e-12)
                assert np.allclose(frame @ frame.T, np.eye(3), atol=1e-12)
            b_nv = field_in_nv_frame(ori, 2, b)
            assert b_nv.magnitude == pytest.approx(b.magnitude, rel=1e-12)

    def test_class_index_validated(self):
        ori = CrystalOrientation.identity()
        b = FieldVector(0.0, 0.0, 0.1)
        with pytest.raises(ValueError, match="class index"):
            field_in_nv_frame(ori, 4, b)


class TestAngularState:
    def test_ranges_enforced(self):
        with pytest.raises(ValueError):
            AngularState(theta=-0.1)
        with pytest.raises(ValueError):
            AngularState(theta=3.5)
        s = AngularState(theta=0.3, phi=7.0)
        assert 0.0 <= s.phi < 2.0 * np.pi

    def test_gimbal_degenerate_azimuth(self):
        s = AngularState(theta=0.0, phi=1.2)
        assert s.phi == 0.0

    def test_derived_from_field(self):
        ori = CrystalOrientation.identity()
        b = FieldVector.from_array(0.1 * NV_AXES[0], frame="lab")
        s = angular_state(ori, b, tracked_class=0)
        assert s.theta == pytest.approx(0.0, abs=1e-8)
        # tilt toward another class raises theta to the tetrahedral angle
        s1 = angular_state(ori, FieldVector.from_array(0.1 * NV_AXES[1], "lab"))
        assert s1.theta == pytest.approx(TETRAHEDRAL_ANGLE, rel=1e-12)
