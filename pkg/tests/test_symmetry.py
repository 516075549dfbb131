import numpy as np
from numpy.testing import assert_allclose
from pytest import mark, raises

from bb84_probe.bases import Basis, polar_rotation
from bb84_probe.bounds import info_bound
from bb84_probe.errors import RejectedInputError
from bb84_probe.hilbert import projector
from bb84_probe.measurement import disturbance
from bb84_probe.optimizer import random_strategy
from bb84_probe.probe import build_optimal, intercept_resend_strategy
from bb84_probe.symmetry import (
    Branch,
    SymmetrizedStrategy,
    average_information,
    bob_channel,
    branch_strategy,
    damneq_check,
    symmetrize,
)


class TestBobChannel:
    def test_optimal_is_isotropic(self):
        _, report = bob_channel(build_optimal(0.1, 0.1).strategy())
        assert_allclose(report.d_avg, 0.1, atol=1e-12)
        assert report.isotropy_residual < 1e-12
        assert_allclose(report.i_avg, info_bound(0.1), atol=1e-10)

    def test_asymmetric_is_not_isotropic(self):
        _, report = bob_channel(build_optimal(0.1, 0.3).strategy())
        assert report.isotropy_residual > 0.05

    def test_channel_preserves_trace(self):
        channel, _ = bob_channel(intercept_resend_strategy())
        out = channel(np.eye(2) / 2)
        assert_allclose(np.trace(out).real, 1.0, atol=1e-14)


class TestBranches:
    def test_quarter_turn_swaps_disturbances(self):
        base = build_optimal(0.1, 0.2).strategy()
        turned = branch_strategy(base, Branch(90, False, 1.0))
        assert_allclose(disturbance(turned, Basis.XY), 0.2, atol=1e-12)
        assert_allclose(disturbance(turned, Basis.UV), 0.1, atol=1e-12)

    @mark.parametrize("angle", [0, 90, 180, 270])
    @mark.parametrize("conjugate", [False, True])
    def test_branch_keeps_information(self, angle, conjugate):
        base = build_optimal(0.1, 0.2).strategy()
        turned = branch_strategy(base, Branch(angle, conjugate, 1.0))
        assert_allclose(average_information(turned), average_information(base), atol=1e-12)

    def test_weights_must_sum_to_one(self):
        base = build_optimal(0.1, 0.1).strategy()
        with raises(RejectedInputError):
            SymmetrizedStrategy(base, (Branch(0, False, 0.5),), 0.0)


class TestSymmetrize:
    def test_eight_equal_branches(self):
        sym = symmetrize(build_optimal(0.1, 0.1).strategy())
        assert len(sym.branches) == 8
        assert all(br.weight == 0.125 for br in sym.branches)

    def test_symmetric_optimum_unchanged(self):
        base = build_optimal(0.1, 0.1).strategy()
        sym = symmetrize(base)
        d, residual = damneq_check(sym)
        assert_allclose(d, 0.1, atol=1e-12)
        assert residual < 1e-10
        assert_allclose(sym.mutual_information(), info_bound(0.1), atol=1e-10)

    @mark.parametrize("d_xy,d_uv", [(0.1, 0.2), (0.2, 0.1)])
    def test_asymmetric_becomes_isotropic(self, d_xy, d_uv):
        base = build_optimal(d_xy, d_uv).strategy()
        d, residual = damneq_check(symmetrize(base))
        assert residual < 1e-10
        assert_allclose(d, 0.15, rtol=0, atol=1e-12)

    def test_random_strategies(self, rng):
        for _ in range(100):
            base = random_strategy(rng)
            _, report = bob_channel(base)
            sym = symmetrize(base)
            d, residual = damneq_check(sym)
            assert residual < 1e-10
            assert d <= report.d_avg + 1e-12
            assert_allclose(sym.mutual_information(), report.i_avg, atol=1e-10)

    def test_report_fields(self):
        report = symmetrize(build_optimal(0.2, 0.1).strategy()).report()
        assert_allclose(report.d_xy, report.d_uv, atol=1e-10)
        assert_allclose(report.d_avg, 0.5 * (report.d_xy + report.d_uv))


class TestCovariance:
    @staticmethod
    def random_state(rng):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        return projector(v / np.linalg.norm(v))

    @mark.parametrize("probe_dim", [2, 4])
    def test_channel_commutes_with_quarter_turn(self, rng, probe_dim):
        turn = polar_rotation(np.pi / 2)
        for base in (build_optimal(0.2, 0.1).strategy(), random_strategy(rng, probe_dim)):
            sym = symmetrize(base)
            for _ in range(5):
                rho = self.random_state(rng)
                assert_allclose(sym.channel(turn @ rho @ turn.conj().T),
                                turn @ sym.channel(rho) @ turn.conj().T, atol=1e-12)

    def test_unsymmetrized_channel_is_not_covariant(self):
        channel, _ = bob_channel(build_optimal(0.1, 0.3).strategy())
        turn = polar_rotation(np.pi / 2)
        rho = projector(np.array([1.0, 0.0]))
        assert np.max(np.abs(channel(turn @ rho @ turn.conj().T) - turn @ channel(rho) @ turn.conj().T)) > 0.05
