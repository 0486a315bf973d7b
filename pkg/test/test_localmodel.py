import itertools
import math

import numpy as np
import pytest

from singpack.core.exceptions import (
    DomainError,
    HyperboloidRegimeError,
    InputError,
    SingularLocusError,
)
from singpack.services import localmodel as lm


@pytest.fixture
def chart():
    return lm.DiscBundleChart(a=1 / 3, gamma=0.5, A=1.0)


def _grid(chart, n=10, margin=1e-3):
    """n^4 grid in the interior of the chart"""
    P = np.linspace(margin, chart.A - margin, n)
    R = np.linspace(margin, 1 - margin, n)
    angles = np.linspace(0, 1, n, endpoint=False)
    return np.array(list(itertools.product(P, angles, R, angles)))


class TestDiscBundleChart:

    def test_from_rationals(self):
        """Test a chart built from rational strings"""
        chart = lm.DiscBundleChart.from_rationals("1/3", "1/2", "3", "1/10")
        assert chart.a == pytest.approx(1 / 3)
        assert chart.base_area == pytest.approx(2.9)

    @pytest.mark.parametrize("kwargs", [
        {"a": 0, "gamma": 0, "A": 1},
        {"a": 1, "gamma": 0, "A": -1},
        {"a": 1, "gamma": 0, "A": 1, "delta": 1},
    ])
    def test_invalid(self, kwargs):
        """Test non-positive parameters and a shrinkage eating the base"""
        with pytest.raises(InputError):
            lm.DiscBundleChart(**kwargs)


class TestForms:

    def test_split_form_when_gamma_vanishes(self):
        """Test gamma = 0 gives the split form dP dzeta + a dR dtheta"""
        chart = lm.DiscBundleChart(a=2.0, gamma=0.0, A=1.0)
        forms = lm.forms_at(chart, lm.ChartPoint(0.5, 0.1, 0.3, 0.2))
        expected = np.zeros((4, 4))
        expected[0, 1], expected[1, 0] = 1, -1
        expected[2, 3], expected[3, 2] = 2, -2
        np.testing.assert_allclose(forms.omega, expected)

    def test_coefficients(self, chart):
        """Test the form coefficients at a sample point"""
        forms = lm.forms_at(chart, lm.ChartPoint(0.5, 0.0, 0.5, 0.0))
        assert forms.omega[lm.P, lm.ZETA] == pytest.approx(3 / 4)
        assert forms.omega[lm.R, lm.ZETA] == pytest.approx(-1 / 4)
        assert forms.omega[lm.R, lm.THETA] == pytest.approx(1 / 3)
        np.testing.assert_allclose(forms.omega, -forms.omega.T)
        assert forms.lam[lm.ZETA] == pytest.approx(-3 / 8)
        np.testing.assert_allclose(forms.alpha, [0, -1 / 4, 0, 1 / 3])

    def test_fiber_component_vanishes_at_rim(self, chart):
        """Test lambda has no dtheta part at R = 1"""
        lam = lm.liouville_form(chart, [0.5, 0.0, 1.0, 0.0])
        assert lam[lm.THETA] == 0

    def test_out_of_domain(self, chart):
        """Test points outside the chart and points of the wrong length"""
        with pytest.raises(DomainError):
            lm.forms_at(chart, [0.5, 0.0, 1.2, 0.0])
        with pytest.raises(InputError):
            lm.forms_at(chart, [0.5, 0.0, 0.5])

    def test_batch_shape(self, chart):
        """Test forms are evaluated over a batch of points"""
        points = _grid(chart, n=3)
        forms = lm.forms_at(chart, points)
        assert forms.omega.shape == (81, 4, 4)
        assert forms.lam.shape == (81, 4)


class TestLiouvilleField:

    def test_outward_at_zero_section(self, chart):
        """Test X points out of the zero section"""
        X = lm.liouville_field(chart, [0.3, 0.0, 0.0, 0.0])
        assert X[lm.R] == 1

    def test_base_contraction(self):
        """Test X contracts the base when gamma = 0"""
        chart = lm.DiscBundleChart(a=1.0, gamma=0.0, A=1.0)
        assert lm.liouville_field(chart, [1.0, 0.0, 0.5, 0.0])[lm.P] == pytest.approx(-1)

    def test_example(self):
        """Test the base component of X at a sample point"""
        chart = lm.DiscBundleChart(a=1.0, gamma=0.5, A=3.0)
        assert lm.liouville_field(chart, [2.0, 0.0, 0.5, 0.0])[lm.P] == pytest.approx(-4 / 3)

    def test_singular_locus(self):
        """Test gamma R = 1 is refused"""
        chart = lm.DiscBundleChart(a=1.0, gamma=2.0, A=1.0)
        with pytest.raises(SingularLocusError):
            lm.liouville_field(chart, [0.5, 0.0, 0.5, 0.0])

    @pytest.mark.parametrize("gamma, a", itertools.product([-1.0, 0.0, 0.5], [1 / 3, 1.0, 2.0]))
    def test_liouville_identity(self, gamma, a):
        """Test omega(X, .) = lambda at quasi-random points"""
        chart = lm.DiscBundleChart(a=a, gamma=gamma, A=1.0)
        points = lm.quasi_random_points(chart, 1000, seed=0)
        assert lm.liouville_defect(chart, points) <= 1e-10

    def test_outward_margin(self, chart):
        """Test the outward margin is 1 - R inside the chart"""
        points = lm.quasi_random_points(chart, 500, seed=1)
        margin = lm.outward_margin(chart, points)
        np.testing.assert_allclose(margin, 1 - points[:, lm.R])
        assert np.all(margin > 0)


class TestPhi:

    def test_identity_when_flat(self):
        """Test Phi is the identity when gamma = 0 and a = 1"""
        chart = lm.DiscBundleChart(a=1.0, gamma=0.0, A=1.0)
        point = np.array([0.4, 0.1, 0.6, 0.9])
        np.testing.assert_allclose(lm.phi_map(chart, point), point)

    def test_example(self, chart):
        """Test the image of a sample point in the ellipsoid chart"""
        image = lm.phi_map(chart, [0.5, 0.0, 0.5, 0.0])
        np.testing.assert_allclose(image[[lm.P, lm.R]], [3 / 8, 1 / 6])

    def test_zero_section(self, chart):
        """Test Phi fixes the zero section"""
        image = lm.phi_map(chart, [0.7, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(image[[lm.P, lm.R]], [0.7, 0.0])

    def test_volume_density_is_jacobian(self, chart):
        """Test the volume density at a sample point"""
        x = np.array([0.5, 0.0, 0.5, 0.0])
        assert lm.volume_density(chart, x) == pytest.approx(1 / 3 * 3 / 4)


class TestFiniteDifferenceChecks:

    def test_pullback_example(self, chart):
        """Test the pullback at one point"""
        assert lm.pullback_defect(chart, [0.5, 0.3, 0.5, 0.7], 1e-5) <= 1e-8

    @pytest.mark.parametrize("gamma, a", itertools.product([-1.0, 0.0, 0.5], [1 / 3, 1.0, 2.0]))
    def test_pullback_grid(self, gamma, a):
        """Test Phi pulls omega_st back to omega at two step sizes"""
        chart = lm.DiscBundleChart(a=a, gamma=gamma, A=1.0)
        points = _grid(chart)
        assert lm.pullback_defect(chart, points, 1e-5) <= 1e-8
        assert lm.pullback_defect(chart, points, 5e-6) <= 1e-8

    @pytest.mark.parametrize("gamma", [-1.0, 0.0, 0.5])
    def test_exactness(self, gamma):
        """Test d lambda = omega by finite differences"""
        chart = lm.DiscBundleChart(a=2.0, gamma=gamma, A=1.0)
        points = lm.quasi_random_points(chart, 1000, seed=2, margin=1e-3)
        assert lm.exterior_derivative_defect(chart, points, 1e-4) <= 1e-6

    def test_step_leaving_domain(self, chart):
        """Test a step that leaves the chart and a zero step"""
        with pytest.raises(DomainError):
            lm.pullback_defect(chart, [0.0, 0.0, 0.5, 0.0], 1e-5)
        with pytest.raises(InputError):
            lm.exterior_derivative_defect(chart, [0.5, 0.0, 0.5, 0.0], 0.0)


class TestFlow:

    def test_identity_at_zero_time(self, chart):
        """Test the flow at time zero"""
        y = np.array([0.3, 0.1, 0.2, 0.4])
        np.testing.assert_allclose(lm.flow_closed_form(chart, y, 0.0), y)

    def test_example(self, chart):
        """Test the flow of (1, 0, 0, 0) for time log 2"""
        flowed = lm.flow_closed_form(chart, [1.0, 0.0, 0.0, 0.0], math.log(2))
        np.testing.assert_allclose(flowed[[lm.R, lm.P]], [1 / 6, 1 / 2])

    def test_attractor(self, chart):
        """Test the flow converges to (0, a)"""
        flowed = lm.flow_closed_form(chart, [1.0, 0.0, 0.0, 0.0], 50.0)
        np.testing.assert_allclose(flowed[[lm.R, lm.P]], [1 / 3, 0.0], atol=1e-12)

    def test_group_property(self, chart):
        """Test flowing 0.7 then 1.1 equals flowing 1.8"""
        y = np.array([0.8, 0.0, 0.1, 0.0])
        twice = lm.flow_closed_form(chart, lm.flow_closed_form(chart, y, 0.7), 1.1)
        np.testing.assert_allclose(twice, lm.flow_closed_form(chart, y, 1.8))

    def test_pushed_field(self, chart):
        """Test the pushed field in the ellipsoid chart"""
        np.testing.assert_allclose(lm.pushed_field(chart, [0.5, 0.0, 0.1, 0.0]), [-0.5, 0, 1 / 3 - 0.1, 0])

    @pytest.mark.parametrize("t", [0.5, 2.0, 5.0])
    def test_agrees_with_rk4(self, chart, rng, t):
        """Test closed form and RK4 agree"""
        y = np.zeros((200, 4))
        y[:, lm.P] = rng.uniform(0, 1, 200)
        y[:, lm.R] = rng.uniform(0, 1, 200)
        closed = lm.flow_closed_form(chart, y, t)
        integrated = lm.flow_rk4(chart, y, t, 1e-3)
        assert np.max(np.abs(closed - integrated)) <= 1e-6


class TestBasin:

    @pytest.fixture
    def shrunk(self):
        return lm.DiscBundleChart(a=1 / 3, gamma=0.5, A=3.0, delta=0.1)

    def test_inside_example(self, shrunk):
        """Test the level of a point inside the basin"""
        verdict = lm.basin_membership(shrunk, [1.0, 0.0, 0.1, 0.0])
        assert verdict.level == pytest.approx(0.3 + 1 / 2.9)
        assert verdict.inside and verdict.agree

    def test_center(self, shrunk):
        """Test the origin is in the basin"""
        assert lm.basin_membership(shrunk, [0.0, 0.0, 0.0, 0.0]).inside

    def test_outside(self, shrunk):
        """Test a point above level one"""
        # level 0.6 + 0.6 = 1.2
        verdict = lm.basin_membership(shrunk, [0.6 * 2.9, 0.0, 0.2, 0.0])
        assert verdict.level == pytest.approx(1.2)
        assert not verdict.analytic and not verdict.dynamic

    def test_beyond_fiber(self, shrunk):
        """Test a point whose fiber coordinate exceeds a"""
        verdict = lm.basin_membership(shrunk, [0.0, 0.0, 0.5, 0.0])
        assert not verdict.reaches_zero_section
        assert not verdict.inside and verdict.agree

    def test_hyperboloid_regime_refused(self):
        """Test negative gamma has no basin"""
        chart = lm.DiscBundleChart(a=1.0, gamma=-1.0, A=1.0)
        with pytest.raises(HyperboloidRegimeError):
            lm.basin_membership(chart, [0.1, 0.0, 0.1, 0.0])

    def test_routes_agree(self, shrunk, rng):
        """Test the inequality and the backward flow agree away from the boundary"""
        y = np.zeros((10_000, 4))
        y[:, lm.P] = rng.uniform(0, 1.5 * shrunk.base_area, 10_000)
        y[:, lm.R] = rng.uniform(0, 1.5 * shrunk.a, 10_000)
        routes = lm.basin_routes(shrunk, y)
        clear = np.abs(routes.level - 1) > 1e-3
        assert np.array_equal(routes.analytic[clear], routes.dynamic[clear])

    def test_monte_carlo_volume(self):
        """Test the sampled basin volume against the exact one"""
        chart = lm.DiscBundleChart(a=2.0, gamma=0.5, A=1.5, delta=0.5)
        volume = lm.basin_volume_monte_carlo(chart, 1_000_000, np.random.default_rng(0))
        assert volume.expected == pytest.approx(1.0)
        assert volume.relative_error < 0.01


class TestPlumbing:

    @pytest.fixture
    def plumbing(self):
        return lm.PlumbingChart(a_i=1.0, a_j=0.5, epsilon=0.2)

    def test_bump_profile(self):
        """Test the bump profile and its derivative"""
        f, fprime = lm.bump_profile([0.05, 0.1, 0.15, 0.2, 0.5], 0.2)
        np.testing.assert_allclose(f[:2], [0.05, 0.1])
        assert 0.1 < f[2] < 0.2
        np.testing.assert_allclose(f[3:], [0.2, 0.2])
        np.testing.assert_allclose(fprime[[0, 1, 3, 4]], [1, 1, 0, 0])
        assert fprime[2] > 0

    def test_standard_form_near_crossing(self, plumbing):
        """Test the plumbing forms near the crossing"""
        omega, lam = lm.plumbing_forms(plumbing, [0.05, 0.3, 0.08, 0.6])
        assert omega[0, 1] == 1.0
        assert omega[2, 3] == 0.5
        np.testing.assert_allclose(lam, [0, 0.95, 0, 0.5 * 0.92])

    def test_field_contracts_to_lambda(self, plumbing):
        """Test the plumbing field contracts omega to lambda"""
        x = np.array([[0.3, 0.0, 0.05, 0.0], [0.7, 0.2, 0.15, 0.9]])
        omega, lam = lm.plumbing_forms(plumbing, x)
        contracted = lm.interior_product(omega, lm.plumbing_field(plumbing, x))
        np.testing.assert_allclose(contracted, lam)

    def test_field_undefined_outside_disc(self, plumbing):
        """Test the plumbing field outside the disc"""
        with pytest.raises(DomainError):
            lm.plumbing_field(plumbing, [0.3, 0.0, 0.5, 0.0])

    def test_gluing_near_crossing(self, plumbing, rng):
        """Test the two charts glue exactly near the crossing"""
        x = rng.uniform(0, 0.1, (500, 4))
        assert lm.gluing_defect(plumbing, x) == 0

    def test_gluing_away_from_crossing(self, plumbing):
        """Test the charts differ away from the crossing"""
        assert lm.gluing_defect(plumbing, [0.5, 0.0, 0.05, 0.0]) > 0
