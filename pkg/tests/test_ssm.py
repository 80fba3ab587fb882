"""
Zero-order-hold discretization and the selective scan
"""
import numpy as np
import pytest

from src.features.btm import AffineMap
from src.forecast.ssm import SsmCell, selective_scan, zoh_discretize
from src.utils.errors import DimensionMismatch, NonPositiveStep, UnstableStateMatrix


class TestZoh:
    def test_scalar_example(self):
        a_bar, b_bar = zoh_discretize([-1.0], [1.0], 0.1)
        assert a_bar[0] == pytest.approx(0.904837, abs=1e-6)
        assert b_bar[0] == pytest.approx(0.095163, abs=1e-6)

    def test_small_step_limit(self):
        a_bar, b_bar = zoh_discretize([-1e-12], [2.0], 1e-3)
        assert a_bar[0] == pytest.approx(1.0)
        assert b_bar[0] == pytest.approx(2e-3)

    def test_limit_is_continuous(self):
        _, exact = zoh_discretize([-1e-7], [1.0], 0.5)
        _, limit = zoh_discretize([-1e-9], [1.0], 0.5)
        assert exact[0] == pytest.approx(limit[0], rel=1e-6)

    def test_step_must_be_positive(self):
        with pytest.raises(NonPositiveStep):
            zoh_discretize([-1.0], [1.0], 0.0)

    def test_shapes_must_agree(self):
        with pytest.raises(DimensionMismatch):
            zoh_discretize([-1.0, -2.0], [1.0], 0.1)


class TestScan:
    def test_lti_matches_impulse_kernel(self, rng):
        a = np.array([-0.5, -1.0, -2.0, -4.0])
        b = rng.normal(size=4)
        c = rng.normal(size=4)
        delta = 0.3
        x = rng.normal(size=32)
        cell = SsmCell.lti(a, b, c, delta, d=0.25)
        a_bar, b_bar = zoh_discretize(a, b, delta)
        kernel = np.array([c @ (a_bar ** j * b_bar) for j in range(32)])
        expected = np.convolve(x, kernel)[:32] + 0.25 * x
        np.testing.assert_allclose(selective_scan(cell, x), expected, rtol=1e-10, atol=1e-12)

    def test_zero_input_stays_at_rest(self):
        cell = SsmCell.lti([-1.0, -3.0], [1.0, 1.0], [1.0, 1.0], 0.1)
        np.testing.assert_array_equal(selective_scan(cell, np.zeros(10)), np.zeros(10))

    def test_selective_scan_is_causal(self, rng):
        cell = SsmCell(np.array([-1.0, -2.0]), 0.1,
                       AffineMap(np.array([[0.5], [-0.3]]), np.array([1.0, 0.5])),
                       AffineMap(np.array([[0.2], [0.1]]), np.array([0.7, -0.4])),
                       AffineMap(np.array([[0.8]]), np.array([-1.0])))
        x = rng.normal(size=24)
        changed = x.copy()
        changed[12:] += 5.0
        first = selective_scan(cell, x)
        second = selective_scan(cell, changed)
        np.testing.assert_array_equal(first[:12], second[:12])
        assert not np.allclose(first[12:], second[12:])

    def test_unstable_matrix_rejected(self):
        with pytest.raises(UnstableStateMatrix):
            SsmCell.lti([-1.0, 0.0], [1.0, 1.0], [1.0, 1.0], 0.1)

    def test_map_dimensions_checked(self):
        with pytest.raises(DimensionMismatch):
            SsmCell(np.array([-1.0, -2.0]), 0.0, AffineMap.constant([1.0]),
                    AffineMap.constant([1.0, 1.0]), AffineMap.constant([0.0]))

    def test_state_stays_bounded_over_long_runs(self, rng):
        cell = SsmCell(np.array([-0.05, -0.5, -3.0]), 0.0,
                       AffineMap(np.array([[0.4], [-0.2], [0.1]]), np.array([1.0, 0.5, -1.0])),
                       AffineMap(np.array([[0.3], [0.0], [-0.2]]), np.array([1.0, -1.0, 0.5])),
                       AffineMap(np.array([[0.5]]), np.array([0.0])))
        x = rng.uniform(-1.0, 1.0, 10_000)
        y = selective_scan(cell, x)
        assert np.isfinite(y).all()
        assert np.abs(y).max() < 1e3

    def test_lti_scan_is_linear(self, rng):
        cell = SsmCell.lti([-0.2, -1.0, -5.0], rng.normal(size=3), rng.normal(size=3), 0.4, d=0.5)
        x = rng.normal(size=64)
        z = rng.normal(size=64)
        y_x = selective_scan(cell, x)
        np.testing.assert_allclose(selective_scan(cell, -2.5 * x), -2.5 * y_x, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(selective_scan(cell, x + z), y_x + selective_scan(cell, z),
                                   rtol=1e-10, atol=1e-12)
