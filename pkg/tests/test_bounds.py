import numpy as np
from numpy.testing import assert_allclose
from pytest import raises

from bb84_probe.bounds import (
    LN2,
    bound_point,
    concavity_check,
    gain_bound,
    info_bound,
    log_ratio_term,
    phi,
    small_d_slope_check,
)
from bb84_probe.errors import RejectedInputError


class TestPhi:
    def test_endpoints(self):
        assert phi(0.0) == 0.0
        assert_allclose(phi(1.0), 2 * LN2)

    def test_array_input(self):
        z = np.array([0.0, 0.6, 1.0])
        assert_allclose(phi(z), [0.0, 1.6 * np.log(1.6) + 0.4 * np.log(0.4), 2 * LN2])

    def test_out_of_range(self):
        with raises(RejectedInputError):
            phi(1.5)
        with raises(RejectedInputError):
            phi(-0.1)


class TestBounds:
    def test_gain_bound(self):
        assert_allclose(gain_bound(0.1), 0.6)
        assert_allclose(gain_bound(0.5), 1.0)
        assert gain_bound(0.0) == 0.0

    def test_gain_bound_symmetric_on_unit_interval(self):
        assert_allclose(gain_bound(0.8), gain_bound(0.2))

    def test_info_bound_values(self):
        assert_allclose(info_bound(0.1), 0.19274, atol=1e-5)
        assert_allclose(info_bound(0.5), LN2, atol=1e-12)
        assert info_bound(0.0) == 0.0

    def test_bound_point(self):
        point = bound_point(0.1)
        assert point.d == 0.1
        assert_allclose(point.g_bound, 0.6)
        assert point.i_bound_nats == info_bound(0.1)
        with raises(RejectedInputError):
            bound_point(0.6)

    def test_info_bound_domain(self):
        with raises(RejectedInputError):
            info_bound(0.6)

    def test_monotone(self):
        values = [info_bound(d) for d in np.linspace(0, 0.5, 26)]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestChecks:
    def test_small_d_slope(self):
        report = small_d_slope_check()
        assert report.passed
        assert abs(report.ratios[-1] - 2.0) < 0.1

    def test_concavity(self):
        report = concavity_check(1e-3)
        assert report.passed
        assert report.max_second_difference < 0

    def test_concavity_step_range(self):
        with raises(RejectedInputError):
            concavity_check(0.2)

    def test_log_ratio_term_negative(self):
        z = np.linspace(0.01, 0.99, 50)
        assert np.all(log_ratio_term(z) < 0)
