import numpy as np
from numpy.testing import assert_allclose
from pytest import mark, raises

from bb84_probe.analysis import (
    THRESHOLD_CLOSED_FORM,
    chsh_formula,
    chsh_from_state,
    i_ab,
    i_ab_phi_form,
    intercept_resend,
    single_qubit_curve,
    threshold,
    tradeoff_curve,
    tradeoff_row,
)
from bb84_probe.bounds import LN2, info_bound
from bb84_probe.config import TOL
from bb84_probe.errors import RejectedInputError

GRID = np.linspace(0.0, 0.5, 51)


class TestAliceBob:
    def test_two_forms_agree(self):
        for d in GRID:
            assert_allclose(i_ab(d), i_ab_phi_form(d), atol=1e-12)

    def test_endpoints(self):
        assert_allclose(i_ab(0.0), LN2)
        assert_allclose(i_ab(0.5), 0.0, atol=1e-15)

    def test_domain(self):
        with raises(RejectedInputError):
            i_ab(0.7)


class TestThreshold:
    def test_three_roots_agree(self):
        roots = threshold()
        assert_allclose(roots.bisection, roots.closed_form, atol=1e-8)
        assert_allclose(roots.chsh_root, roots.closed_form, atol=1e-8)
        assert round(THRESHOLD_CLOSED_FORM, 6) == 0.146447

    def test_informations_equal_at_threshold(self):
        assert_allclose(i_ab(0.14644661), 0.2766557, atol=1e-6)
        assert_allclose(i_ab(0.14644661), info_bound(0.14644661), atol=1e-6)


class TestChsh:
    def test_maximal_violation_without_eve(self):
        assert_allclose(chsh_from_state(0.0), 2 * np.sqrt(2), atol=1e-10)

    def test_matches_formula(self):
        for d in GRID:
            assert_allclose(chsh_from_state(d), chsh_formula(d), atol=1e-10)

    def test_classical_limit_at_threshold(self):
        assert_allclose(chsh_formula(THRESHOLD_CLOSED_FORM), 2.0, atol=1e-12)


class TestTradeoff:
    def test_row_count(self):
        rows = tradeoff_curve(0.0, 0.5, 0.01)
        assert len(rows) == 51
        assert rows[0].d == 0.0 and rows[-1].d == 0.5

    def test_security_flips_at_threshold(self):
        rows = {row.d: row for row in tradeoff_curve(0.0, 0.5, 0.01)}
        assert rows[0.14].secure
        assert not rows[0.15].secure

    def test_row_fields(self):
        row = tradeoff_row(0.1)
        assert_allclose(row.g_bound, 0.6)
        assert row.g_achieved == row.g_bound
        assert_allclose(row.i_eve_bits * LN2, row.i_eve_nats)
        assert_allclose(row.s_chsh, 2 * np.sqrt(2) * 0.8)

    @mark.parametrize("d_min,d_max,step", [(0.4, 0.1, 0.01), (0.0, 0.6, 0.1), (0.0, 0.5, 0.0)])
    def test_invalid_range(self, d_min, d_max, step):
        with raises(RejectedInputError):
            tradeoff_curve(d_min, d_max, step)


class TestBaselines:
    def test_intercept_resend(self):
        row = intercept_resend()
        assert row.label == "intercept-resend"
        assert_allclose(row.d, 0.25, atol=1e-14)
        assert_allclose(row.i_eve_nats, 0.5 * LN2, atol=1e-12)
        assert_allclose(row.g_achieved, 0.5, atol=1e-12)
        assert_allclose(row.g_bound, np.sqrt(0.75), atol=1e-12)
        assert_allclose(row.s_chsh, np.sqrt(2), atol=1e-12)
        assert not row.secure

    def test_intercept_resend_below_optimal_curve(self):
        row = intercept_resend()
        assert row.i_eve_nats < info_bound(0.25)

    @mark.slow
    def test_single_qubit_probe_reaches_bound(self):
        (row,) = single_qubit_curve([0.1], restarts=4, seed=0)
        assert row.label == "numerical"
        assert row.i_eve_nats >= 2 * LN2 * row.d
        assert row.i_eve_nats >= info_bound(min(row.d, 0.5)) - TOL.optimization
        assert row.i_eve_nats <= info_bound(min(row.d, 0.5)) + 1e-9
