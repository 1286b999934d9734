import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from roughfrac.geometry import (Ball, QuadratureError, SingularQuadrature,
                                ball_volume, integrate_on_ball,
                                integrate_singular, log_grid, sphere_rule,
                                unit_sphere_measure)


class TestBallVolume:
    @pytest.mark.parametrize("n,r,expected", [
        (1, 1.0, 2.0),
        (2, 1.0, math.pi),
        (2, 2.0, 4.0 * math.pi),
    ])
    def test_closed_forms(self, n, r, expected):
        assert ball_volume(n, r) == pytest.approx(expected, rel=1e-15)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            ball_volume(3, 1.0)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            ball_volume(1, 0.0)
        with pytest.raises(ValueError):
            Ball(np.zeros(2), -1.0)


class TestLogGrid:
    def test_geometric_midpoint(self):
        assert log_grid(1.0, 4.0, 3).nodes == pytest.approx([1.0, 2.0, 4.0])

    def test_endpoints_only(self):
        assert log_grid(0.1, 10.0, 2).nodes == pytest.approx([0.1, 10.0])

    def test_decade_spacing(self):
        nodes = log_grid(1.0, 1e6, 7).nodes
        assert nodes[1:] / nodes[:-1] == pytest.approx(np.full(6, 10.0))

    def test_degenerate_range_rejected(self):
        with pytest.raises(ValueError):
            log_grid(2.0, 1.0, 5)
        with pytest.raises(ValueError):
            log_grid(1.0, 2.0, 1)

    @given(st.floats(1e-8, 1e6), st.floats(1.5, 1e8), st.integers(2, 200))
    @settings(max_examples=100)
    def test_ratio_constant(self, rmin, factor, count):
        grid = log_grid(rmin, rmin * factor, count)
        ratios = grid.nodes[1:] / grid.nodes[:-1]
        assert np.all(np.abs(ratios / ratios[0] - 1.0) < 1e-12)
        assert grid.nodes[0] == rmin
        assert grid.nodes[-1] == rmin * factor


class TestSphereRule:
    def test_line_rule(self):
        rule = sphere_rule(1)
        assert sorted(rule.nodes[:, 0].tolist()) == [-1.0, 1.0]
        assert rule.weights.tolist() == [1.0, 1.0]

    def test_quarter_turn_rule(self):
        rule = sphere_rule(2, 4)
        assert rule.weights == pytest.approx(np.full(4, math.pi / 2))
        # consecutive nodes a quarter turn apart
        for a, b in zip(rule.nodes, np.roll(rule.nodes, -1, axis=0)):
            assert abs(np.dot(a, b)) < 1e-12

    @pytest.mark.parametrize("n,count", [(1, 2), (2, 4), (2, 64)])
    def test_total_measure(self, n, count):
        rule = sphere_rule(n, count)
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(unit_sphere_measure(n), abs=1e-12)
        assert np.linalg.norm(rule.nodes, axis=1) == pytest.approx(np.ones(len(rule)))

    def test_trig_exactness(self):
        rule = sphere_rule(2, 8)
        # integrates cos^2 (degree 2 < 8) exactly
        assert rule.integrate(rule.nodes[:, 0] ** 2) == pytest.approx(math.pi, rel=1e-14)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            sphere_rule(3, 8)


def _ones(pts):
    return np.ones(pts.shape[0])


class TestIntegrateSingular:
    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_centered_polar_value(self, n, alpha, r):
        if not 0.0 < alpha < n:
            pytest.skip("alpha outside (0, n)")
        sq = SingularQuadrature(Ball(np.zeros(n), r), np.zeros(n), n - alpha)
        expected = unit_sphere_measure(n) * r**alpha / alpha
        assert integrate_singular(sq, _ones) == pytest.approx(expected, rel=1e-6)

    def test_interval_closed_form(self):
        sq = SingularQuadrature(Ball(np.zeros(1), 1.0), np.zeros(1), 0.5)
        assert integrate_singular(sq, _ones) == pytest.approx(4.0, rel=1e-9)

    def test_disk_closed_form(self):
        sq = SingularQuadrature(Ball(np.zeros(2), 1.0), np.zeros(2), 1.0)
        assert integrate_singular(sq, _ones) == pytest.approx(2 * math.pi, rel=1e-9)

    def test_zero_integrand(self):
        sq = SingularQuadrature(Ball(np.zeros(1), 1.0), np.zeros(1), 0.5)
        assert integrate_singular(sq, lambda pts: np.zeros(pts.shape[0])) == 0.0

    def test_off_center_interval(self):
        sq = SingularQuadrature(Ball(np.zeros(1), 1.0), np.array([0.5]), 0.5)
        expected = 2.0 * (math.sqrt(0.5) + math.sqrt(1.5))
        assert integrate_singular(sq, _ones) == pytest.approx(expected, rel=1e-9)

    def test_off_center_disk_against_angular_oracle(self):
        # independent oracle: reduce to a smooth 1D angular integral
        center_offset = np.array([0.3, 0.0])
        alpha = 0.7
        sq = SingularQuadrature(Ball(np.zeros(2), 1.0), center_offset, 2 - alpha)

        def rho_exit(phi):
            th = np.array([math.cos(phi), math.sin(phi)])
            b = -center_offset @ th
            return b + math.sqrt(b * b - (center_offset @ center_offset - 1.0))

        oracle = quad(lambda phi: rho_exit(phi)**alpha / alpha,
                      0.0, 2.0 * math.pi, limit=200)[0]
        assert integrate_singular(sq, _ones) == pytest.approx(oracle, rel=1e-7)

    def test_smooth_integrand_against_quadpack(self):
        sq = SingularQuadrature(Ball(np.zeros(1), 1.0), np.zeros(1), 0.5)
        value = integrate_singular(sq, lambda pts: np.exp(-pts[:, 0]**2))
        oracle = quad(lambda y: math.exp(-y * y) * abs(y)**-0.5,
                      -1.0, 1.0, points=[0.0], limit=200)[0]
        assert value == pytest.approx(oracle, rel=1e-8)

    def test_linearity(self):
        sq = SingularQuadrature(Ball(np.zeros(1), 1.0), np.zeros(1), 0.5)
        g1 = lambda pts: np.exp(-pts[:, 0]**2)
        g2 = lambda pts: np.cos(pts[:, 0])
        a = 3.7
        combined = integrate_singular(sq, lambda pts: a * g1(pts) + g2(pts))
        separate = a * integrate_singular(sq, g1) + integrate_singular(sq, g2)
        assert combined == pytest.approx(separate, rel=1e-9)

    def test_rejects_singularity_outside(self):
        with pytest.raises(ValueError):
            SingularQuadrature(Ball(np.zeros(1), 1.0), np.array([2.0]), 0.5)

    def test_rejects_bad_exponent(self):
        with pytest.raises(ValueError):
            SingularQuadrature(Ball(np.zeros(1), 1.0), np.zeros(1), 1.5)
        with pytest.raises(ValueError):
            SingularQuadrature(Ball(np.zeros(2), 1.0), np.zeros(2), 0.0)

    def test_nonconvergence_reports_estimate(self):
        # an interior jump off every panel edge, with an impossible budget
        sq = SingularQuadrature(Ball(np.zeros(1), 1.0), np.zeros(1), 0.5,
                                rel_tol=1e-16, abs_tol=1e-18, max_rounds=2)
        with pytest.raises(QuadratureError) as err:
            integrate_singular(sq, lambda pts: (pts[:, 0] > 1 / math.pi).astype(float))
        assert err.value.value != 0.0
        assert err.value.error_estimate > 0.0


class TestIntegrateOnBall:
    def test_indicator_with_aligned_breakpoint(self):
        ball = Ball(np.zeros(1), 2.0)
        value = integrate_on_ball(
            ball, lambda pts: (np.abs(pts[:, 0]) <= 1.0).astype(float),
            breakpoint_spheres=[(np.zeros(1), 1.0)])
        assert value == pytest.approx(2.0, rel=1e-12)

    def test_disk_area(self):
        value = integrate_on_ball(Ball(np.zeros(2), 1.5), _ones)
        assert value == pytest.approx(math.pi * 2.25, rel=1e-12)

    def test_log_singular_integrand(self):
        value = integrate_on_ball(Ball(np.zeros(1), 1.0),
                                  lambda pts: np.log(np.abs(pts[:, 0])))
        assert value == pytest.approx(-2.0, rel=1e-6)
