"""Tests for the range/azimuth/polar measurement model."""

import math

import numpy as np
import pytest

from src.model.state import EnuVector
from src.tracking import measurement
from src.util.error_handling import DegenerateGeometry, GimbalSingularity
from test.fixtures import central_gradient, random_rel


def _h_wrapped(rel):
    return measurement.measure_relative(rel).to_array()


def _jacobian_by_differences(rel, h=1e-6):
    columns = []
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        diff = _h_wrapped(rel + step) - _h_wrapped(rel - step)
        diff[1] = measurement.wrap_angle(diff[1])
        columns.append(diff / (2 * h))
    return np.stack(columns, axis=-1)


class TestWrapAngle:
    """Tests for wrapping angles into (-pi, pi]."""

    def test_values_in_range_unchanged(self):
        """Should leave angles already in range untouched."""
        for a in (0.0, 1.0, -3.0, math.pi):
            assert measurement.wrap_angle(a) == a

    def test_minus_pi_maps_to_pi(self):
        """Should map -pi onto the closed end of the interval."""
        assert measurement.wrap_angle(-math.pi) == pytest.approx(math.pi)

    def test_multiples_of_two_pi(self):
        """Should remove whole turns."""
        assert measurement.wrap_angle(3 * math.pi) == pytest.approx(math.pi)
        assert measurement.wrap_angle(0.5 + 4 * math.pi) == pytest.approx(0.5)
        assert measurement.wrap_angle(-0.5 - 2 * math.pi) == pytest.approx(-0.5)

    def test_just_above_pi_stays_in_range(self):
        """Should not round an angle one ulp past pi down to -pi."""
        above = math.nextafter(math.pi, 4.0)
        assert measurement.wrap_angle(above) == pytest.approx(math.pi, abs=1e-12)
        for k in range(-50, 51):
            wrapped = measurement.wrap_angle(above + 2.0 * math.pi * k)
            assert -math.pi < wrapped <= math.pi


class TestMeasure:
    """Tests for the noise-free measurement function."""

    def test_target_due_east(self):
        """Should give unit range, zero azimuth and a horizontal polar angle."""
        z = measurement.measure(EnuVector(1, 0, 0), EnuVector(0, 0, 0))
        assert z.r == pytest.approx(1.0)
        assert z.phi == pytest.approx(0.0)
        assert z.theta == pytest.approx(math.pi / 2)

    def test_target_due_north_and_above(self):
        """Should measure the azimuth from east towards north."""
        z = measurement.measure([0, 3, 4], [0, 0, 0])
        assert z.r == pytest.approx(5.0)
        assert z.phi == pytest.approx(math.pi / 2)
        assert z.theta == pytest.approx(math.acos(4 / 5))

    def test_vertical_axis_conventions(self):
        """Should use azimuth 0 straight above or below the agent."""
        above = measurement.measure([1, 1, 3], [1, 1, 1])
        below = measurement.measure([1, 1, -1], [1, 1, 1])
        assert above.phi == 0.0 and above.theta == pytest.approx(0.0)
        assert below.phi == 0.0 and below.theta == pytest.approx(math.pi)

    def test_coincident_positions_raise(self):
        """Should refuse to measure from the target's own position."""
        with pytest.raises(DegenerateGeometry):
            measurement.measure([2, 2, 2], [2, 2, 2])

    def test_spherical_to_enu_inverts_measure(self, rng):
        """Should recover the target position from its measurement."""
        agent = np.array([1.0, -2.0, 0.5])
        target = agent + random_rel(rng)
        z = measurement.measure(target, agent).to_array()
        np.testing.assert_allclose(measurement.spherical_to_enu(z, agent), target, atol=1e-12)

    def test_rotation_about_up_shifts_azimuth(self, rng):
        """Should shift only the azimuth when the geometry turns about the up axis."""
        for _ in range(100):
            rel = random_rel(rng)
            alpha = rng.uniform(-2.0 * math.pi, 2.0 * math.pi)
            c, s = math.cos(alpha), math.sin(alpha)
            turned = np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1], rel[2]])
            before = measurement.measure_relative(rel)
            after = measurement.measure_relative(turned)
            assert after.r == pytest.approx(before.r, rel=1e-12)
            assert after.theta == pytest.approx(before.theta, abs=1e-9)
            assert measurement.wrap_angle(after.phi - before.phi - alpha) == pytest.approx(0.0, abs=1e-9)


class TestJacobian:
    """Tests for the analytic measurement Jacobian."""

    def test_velocity_columns_zero(self, rng):
        """Should never depend on target velocity."""
        H = measurement.jacobian(random_rel(rng))
        assert H.shape == (3, 6)
        assert np.all(H[:, 3:] == 0.0)

    def test_matches_finite_differences(self, rng):
        """Should match central differences on random geometries."""
        for _ in range(200):
            rel = random_rel(rng)
            np.testing.assert_allclose(
                measurement.position_jacobian(rel), _jacobian_by_differences(rel), atol=1e-6
            )

    def test_vertical_axis_raises(self):
        """Should refuse the azimuth singularity."""
        with pytest.raises(GimbalSingularity):
            measurement.jacobian([0.0, 0.0, 2.0])

    def test_gimbal_is_degenerate_geometry(self):
        """Should let callers catch both singularities together."""
        with pytest.raises(DegenerateGeometry):
            measurement.jacobian([0.0, 0.0, -1.0])


class TestHessians:
    """Tests for the per-component measurement Hessians."""

    def test_shape_and_velocity_blocks(self, rng):
        """Should be (3, 6, 6) with zeros outside the position block."""
        hess = measurement.hessians(random_rel(rng))
        assert hess.shape == (3, 6, 6)
        assert np.all(hess[:, 3:, :] == 0.0)
        assert np.all(hess[:, :, 3:] == 0.0)

    def test_symmetric(self, rng):
        """Should give symmetric second derivatives."""
        hess = measurement.position_hessians(random_rel(rng))
        np.testing.assert_allclose(hess, np.transpose(hess, (0, 2, 1)))

    def test_matches_jacobian_differences(self, rng):
        """Should equal central differences of the analytic Jacobian."""
        for _ in range(200):
            rel = random_rel(rng)
            numeric = central_gradient(measurement.position_jacobian, rel)
            np.testing.assert_allclose(measurement.position_hessians(rel), numeric, atol=1e-6)
