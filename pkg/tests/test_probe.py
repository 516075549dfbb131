from dataclasses import replace

import numpy as np
from numpy.testing import assert_allclose
from pytest import mark, raises

from bb84_probe.bases import Basis, Signal, signal_vector
from bb84_probe.bounds import info_bound
from bb84_probe.errors import RejectedInputError
from bb84_probe.measurement import Povm, disturbance
from bb84_probe.probe import (
    Strategy,
    ansatz_disturbance,
    build_ansatz,
    build_optimal,
    identity_strategy,
    intercept_resend_strategy,
    keep_qubit_strategy,
    unitary_extension,
    verify_constraints,
)
from bb84_probe.symmetry import average_information

PAIRS = [(0.0, 0.0), (0.1, 0.1), (0.2, 0.1), (0.05, 0.4), (0.5, 0.5), (0.3, 0.0)]


class TestBuildOptimal:
    @mark.parametrize("d_xy,d_uv", PAIRS)
    def test_constraints_hold(self, d_xy, d_uv):
        report = verify_constraints(build_optimal(d_xy, d_uv))
        assert report.passed, report.failures()

    @mark.parametrize("d_xy,d_uv", PAIRS)
    def test_disturbances(self, d_xy, d_uv):
        p = build_optimal(d_xy, d_uv)
        assert_allclose(disturbance(p, Basis.XY), d_xy, atol=1e-12)
        assert_allclose(disturbance(p, Basis.UV), d_uv, atol=1e-12)

    def test_real_amplitudes(self):
        p = build_optimal(0.2, 0.1)
        for s in Signal:
            assert np.all(p.post[s].imag == 0)

    @mark.parametrize("d_xy,d_uv", [(0.6, 0.1), (0.1, -0.01)])
    def test_out_of_range(self, d_xy, d_uv):
        with raises(RejectedInputError):
            build_optimal(d_xy, d_uv)

    def test_constraints_on_grid(self):
        grid = np.linspace(0.0, 0.5, 21)
        failed = [(x, y) for x in grid for y in grid if not verify_constraints(build_optimal(x, y)).passed]
        assert failed == []

    def test_constraints_catch_bad_states(self):
        p = build_optimal(0.1, 0.1)
        stretched = replace(p, xi={**p.xi, Signal.X: 1.01 * p.xi[Signal.X]})
        report = verify_constraints(stretched)
        assert not report.passed
        assert any(name.startswith("xi_norm") for name in report.failures())

    def test_strategy_matches_interaction(self):
        p = build_optimal(0.2, 0.1)
        s = p.strategy()
        for sig in Signal:
            assert_allclose(s.images[sig], p.post[sig], atol=1e-14)


class TestAnsatz:
    def test_disturbance_formula(self):
        assert ansatz_disturbance(0.0, 0.0) == 0.0
        assert_allclose(ansatz_disturbance(np.pi / 2, np.pi / 2), 0.5)

    def test_xy_images_orthogonal(self):
        p = build_ansatz(0.8, 0.3)
        assert abs(np.vdot(p.post[Signal.X], p.post[Signal.Y])) < 1e-14
        assert_allclose(disturbance(p, Basis.XY), ansatz_disturbance(0.8, 0.3), atol=1e-12)

    def test_angle_range(self):
        with raises(RejectedInputError):
            build_ansatz(2.0, 0.1)

    def test_constraints_hold(self):
        p = build_ansatz(0.3, 0.5)
        assert p.construction == "ansatz"
        report = verify_constraints(p)
        assert report.passed, report.failures()

    @mark.parametrize("dist", [0.05, 0.1, 0.25])
    def test_equal_angles_reach_optimal_point(self, dist):
        alpha = np.arcsin(2 * np.sqrt(dist * (1 - dist)))
        ansatz = build_ansatz(alpha, alpha).strategy()
        optimal = build_optimal(dist, dist).strategy()
        assert_allclose(average_information(ansatz), average_information(optimal), atol=1e-10)
        assert_allclose(average_information(ansatz), info_bound(dist), atol=1e-10)
        for b in Basis:
            assert_allclose(disturbance(ansatz, b), disturbance(optimal, b), atol=1e-10)


class TestUnitaryExtension:
    @mark.parametrize("d_xy,d_uv", [(0.0, 0.0), (0.1, 0.3)])
    def test_unitary_and_inputs(self, d_xy, d_uv):
        p = build_optimal(d_xy, d_uv)
        u = unitary_extension(p)
        assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
        assert_allclose(u[:, 0], p.post[Signal.X], atol=1e-14)
        assert_allclose(u[:, 4], p.post[Signal.Y], atol=1e-14)

    @mark.parametrize("sig", [Signal.U, Signal.V])
    def test_conjugate_inputs(self, sig):
        p = build_optimal(0.1, 0.3)
        ready = np.zeros(4)
        ready[0] = 1.0
        u = unitary_extension(p)
        assert_allclose(u @ np.kron(signal_vector(sig), ready), p.post[sig], atol=1e-12)

    def test_general_strategy(self):
        u = unitary_extension(intercept_resend_strategy())
        assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


class TestStrategy:
    def test_rejects_non_isometry(self):
        trivial = Povm((np.eye(2),))
        with raises(RejectedInputError):
            Strategy(2, np.ones((4, 2)), trivial, trivial)

    def test_rejects_wrong_measurement_dimension(self):
        iso = identity_strategy(2).isometry
        with raises(RejectedInputError):
            Strategy(2, iso, Povm((np.eye(4),)), Povm((np.eye(2),)))

    def test_identity_does_not_disturb(self):
        s = identity_strategy()
        assert disturbance(s, Basis.XY) == 0.0
        assert_allclose(disturbance(s, Basis.UV), 0.0, atol=1e-15)

    def test_intercept_resend_disturbance(self):
        s = intercept_resend_strategy()
        for b in Basis:
            assert_allclose(disturbance(s, b), 0.25, atol=1e-14)

    def test_keep_qubit_leaves_noise(self):
        s = keep_qubit_strategy()
        for b in Basis:
            assert_allclose(disturbance(s, b), 0.5, atol=1e-14)
