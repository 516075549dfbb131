"""Eavesdropping interactions: the optimal two-qubit probe, the angle ansatz, and general strategies."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, NamedTuple, Union

import numpy as np
from numpy.typing import NDArray

from .bases import SQRT_HALF, Basis, Signal, bell_basis, signal_vector
from .config import TOL
from .errors import RejectedInputError
from .hilbert import Operator, StateVector, frozen, op_norm, orthonormal_completion, projector, tensor
from .measurement import Povm, bob_marginal, helstrom_povm, optimal_povm, probe_marginal, second_qubit_povm

logger = logging.getLogger(__name__)

TWO_QUBIT_PROBE = 4


@dataclass(frozen=True, eq=False)
class ProbeInteraction:
    """Post-interaction states of the two-qubit probe in Schmidt form.

    ``xi[s]`` and ``zeta[s]`` are the probe states attached to Bob receiving the
    sent signal and its orthogonal partner; ``post[s]`` is the full signal-probe state.
    ``construction`` is "optimal" for build_optimal and "ansatz" for build_ansatz, and
    picks the measurement that ``strategy`` attaches.
    """

    d_xy: float
    d_uv: float
    xi: Dict[Signal, StateVector]
    zeta: Dict[Signal, StateVector]
    post: Dict[Signal, StateVector]
    construction: str = "optimal"

    @property
    def probe_dim(self) -> int:
        return TWO_QUBIT_PROBE

    @property
    def images(self) -> Dict[Signal, StateVector]:
        return self.post

    def disturbance(self, b: Basis) -> float:
        return self.d_xy if b is Basis.XY else self.d_uv

    def strategy(self, measurement: str = "optimal") -> "Strategy":
        """The same interaction as a general Strategy with Eve's measurement attached."""
        if measurement == "optimal" and self.construction == "ansatz":
            meas = {b: self._helstrom(b) for b in Basis}
        elif measurement == "optimal":
            meas = {b: optimal_povm(self, b) for b in Basis}
        elif measurement == "second-qubit":
            meas = {b: second_qubit_povm(b) for b in Basis}
        else:
            raise RejectedInputError(f"Unknown measurement '{measurement}'")
        isometry = np.column_stack([self.post[Signal.X], self.post[Signal.Y]])
        return Strategy(TWO_QUBIT_PROBE, isometry, meas[Basis.XY], meas[Basis.UV])

    def _helstrom(self, b: Basis) -> Povm:
        rho0, rho1 = (probe_marginal(self.post[s], TWO_QUBIT_PROBE) for s in b.signals)
        return helstrom_povm(rho0, rho1)


@dataclass(frozen=True, eq=False)
class Strategy:
    """A general interaction: isometry from the signal into signal (x) probe, plus Eve's measurements.

    Column 0 of ``isometry`` is the image of |x>, column 1 the image of |y>.
    """

    probe_dim: int
    isometry: NDArray[np.complex128]
    meas_xy: Povm
    meas_uv: Povm

    def __post_init__(self) -> None:
        w = np.asarray(self.isometry, dtype=np.complex128)
        if w.shape != (2 * self.probe_dim, 2):
            raise RejectedInputError(
                f"Isometry must have shape {(2 * self.probe_dim, 2)}, got {w.shape}"
            )
        gram_error = np.max(np.abs(w.conj().T @ w - np.eye(2)))
        if gram_error > TOL.algebraic:
            raise RejectedInputError(f"Interaction does not preserve inner products (error {gram_error:.3g})")
        for b, m in ((Basis.XY, self.meas_xy), (Basis.UV, self.meas_uv)):
            if m.dim != self.probe_dim:
                raise RejectedInputError(f"{b.value} measurement has dimension {m.dim}, probe {self.probe_dim}")
        object.__setattr__(self, "isometry", frozen(w))

    @cached_property
    def images(self) -> Dict[Signal, StateVector]:
        x, y = self.isometry[:, 0], self.isometry[:, 1]
        return {
            Signal.X: frozen(x),
            Signal.Y: frozen(y),
            Signal.U: frozen(SQRT_HALF * (x + y)),
            Signal.V: frozen(SQRT_HALF * (x - y)),
        }

    def measurement(self, b: Basis) -> Povm:
        return self.meas_xy if b is Basis.XY else self.meas_uv


Attack = Union[ProbeInteraction, Strategy]


class ConstraintReport(NamedTuple):
    residuals: Dict[str, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(r < self.tolerance for r in self.residuals.values())

    def failures(self) -> List[str]:
        return [name for name, r in self.residuals.items() if not r < self.tolerance]


def _check_disturbance(name: str, d: float) -> float:
    if not 0.0 <= d <= 0.5:
        raise RejectedInputError(f"{name} must lie in [0, 0.5], got {d}")
    return float(d)


def _schmidt(weight: float, sent: Signal, other: Signal, xi: np.ndarray, zeta: np.ndarray) -> StateVector:
    """sqrt(1-D)|sent>|xi> + sqrt(D)|other>|zeta>."""
    return frozen(
        np.sqrt(1.0 - weight) * tensor(signal_vector(sent), xi)
        + np.sqrt(weight) * tensor(signal_vector(other), zeta)
    )


def _post_states(d_xy: float, d_uv: float, xi: Dict[Signal, np.ndarray], zeta: Dict[Signal, np.ndarray]) -> Dict[Signal, StateVector]:
    return {
        Signal.X: _schmidt(d_xy, Signal.X, Signal.Y, xi[Signal.X], zeta[Signal.X]),
        Signal.Y: _schmidt(d_xy, Signal.Y, Signal.X, xi[Signal.Y], zeta[Signal.Y]),
        Signal.U: _schmidt(d_uv, Signal.U, Signal.V, xi[Signal.U], zeta[Signal.U]),
        Signal.V: _schmidt(d_uv, Signal.V, Signal.U, xi[Signal.V], zeta[Signal.V]),
    }


def build_optimal(d_xy: float, d_uv: float) -> ProbeInteraction:
    """Interaction that saturates both information bounds at disturbances (d_xy, d_uv)."""
    d_xy = _check_disturbance("d_xy", d_xy)
    d_uv = _check_disturbance("d_uv", d_uv)
    a, b = np.sqrt(1.0 - d_xy), np.sqrt(d_xy)
    c, d = np.sqrt(1.0 - d_uv), np.sqrt(d_uv)
    bxy = bell_basis(Basis.XY)
    buv = bell_basis(Basis.UV)

    xi = {
        Signal.X: c * bxy.phi_plus + d * bxy.phi_minus,
        Signal.Y: c * bxy.phi_plus - d * bxy.phi_minus,
        Signal.U: a * buv.phi_plus + b * buv.phi_minus,
        Signal.V: a * buv.phi_plus - b * buv.phi_minus,
    }
    zeta = {
        Signal.X: c * bxy.psi_plus - d * bxy.psi_minus,
        Signal.Y: c * bxy.psi_plus + d * bxy.psi_minus,
        Signal.U: a * buv.psi_plus - b * buv.psi_minus,
        Signal.V: a * buv.psi_plus + b * buv.psi_minus,
    }
    xi = {s: frozen(v) for s, v in xi.items()}
    zeta = {s: frozen(v) for s, v in zeta.items()}
    logger.debug("built optimal interaction d_xy=%g d_uv=%g", d_xy, d_uv)
    return ProbeInteraction(d_xy, d_uv, xi, zeta, _post_states(d_xy, d_uv, xi, zeta))


def ansatz_disturbance(alpha: float, beta: float) -> float:
    return (1.0 - np.cos(alpha)) / (2.0 - np.cos(alpha) + np.cos(beta))


def build_ansatz(alpha: float, beta: float) -> ProbeInteraction:
    """Product-form probe where qubit 2 records the Schmidt branch and qubit 1 tilts by alpha or beta."""
    for name, angle in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= angle <= np.pi / 2:
            raise RejectedInputError(f"{name} must lie in [0, pi/2], got {angle}")
    dist = float(ansatz_disturbance(alpha, beta))
    x, y = signal_vector(Signal.X), signal_vector(Signal.Y)
    tilt_a = np.cos(alpha) * x + np.sin(alpha) * y
    tilt_b = np.cos(beta) * x + np.sin(beta) * y

    xi = {Signal.X: tensor(x, x), Signal.Y: tensor(tilt_a, x)}
    zeta = {Signal.X: tensor(x, y), Signal.Y: tensor(tilt_b, y)}

    a, b = np.sqrt(1.0 - dist), np.sqrt(dist)
    xi_sum = a * (xi[Signal.X] + xi[Signal.Y])
    xi_diff = a * (xi[Signal.X] - xi[Signal.Y])
    zeta_sum = b * (zeta[Signal.X] + zeta[Signal.Y])
    zeta_diff = b * (zeta[Signal.Y] - zeta[Signal.X])

    xi[Signal.U] = (xi_sum + zeta_sum) / (2.0 * a)
    xi[Signal.V] = (xi_sum - zeta_sum) / (2.0 * a)
    if b > 0.0:
        zeta[Signal.U] = (xi_diff + zeta_diff) / (2.0 * b)
        zeta[Signal.V] = (xi_diff - zeta_diff) / (2.0 * b)
    else:
        # limit of the linear relation along alpha = beta -> 0
        zeta[Signal.U] = -tensor(y, x)
        zeta[Signal.V] = -tensor(y, x)
    xi = {s: frozen(v) for s, v in xi.items()}
    zeta = {s: frozen(v) for s, v in zeta.items()}
    return ProbeInteraction(dist, dist, xi, zeta, _post_states(dist, dist, xi, zeta), construction="ansatz")


def verify_constraints(p: ProbeInteraction, tolerance: float = TOL.algebraic) -> ConstraintReport:
    """Residual of every consistency condition between the four Schmidt forms."""
    xi, zeta, post = p.xi, p.zeta, p.post
    X, Y, U, V = Signal.X, Signal.Y, Signal.U, Signal.V
    a, b = np.sqrt(1.0 - p.d_xy), np.sqrt(p.d_xy)
    c, d = np.sqrt(1.0 - p.d_uv), np.sqrt(p.d_uv)
    res: Dict[str, float] = {}

    for s in Signal:
        res[f"xi_norm[{s.value}]"] = abs(np.linalg.norm(xi[s]) - 1.0)
        res[f"zeta_norm[{s.value}]"] = abs(np.linalg.norm(zeta[s]) - 1.0)
        res[f"xi_zeta_orthogonal[{s.value}]"] = abs(np.vdot(xi[s], zeta[s]))

    res["xy_orthogonality"] = abs(np.vdot(xi[X], zeta[Y]) + np.vdot(zeta[X], xi[Y]))
    res["uv_orthogonality"] = abs(np.vdot(xi[U], zeta[V]) + np.vdot(zeta[U], xi[V]))
    res["real_part"] = abs((np.vdot(xi[X], zeta[Y]) - np.vdot(zeta[X], xi[Y])).real)
    res["imaginary_part"] = abs(
        (1.0 - p.d_xy) * np.vdot(xi[Y], xi[X]).imag + p.d_xy * np.vdot(zeta[X], zeta[Y]).imag
    )
    res["xi_x_zeta_y"] = abs(np.vdot(xi[X], zeta[Y]))
    res["zeta_x_xi_y"] = abs(np.vdot(zeta[X], xi[Y]))

    xi_sum, xi_diff = a * (xi[X] + xi[Y]), a * (xi[X] - xi[Y])
    zeta_sum, zeta_diff = b * (zeta[X] + zeta[Y]), b * (zeta[Y] - zeta[X])
    res["xi_u_linear"] = np.linalg.norm(2 * c * xi[U] - (xi_sum + zeta_sum))
    res["xi_v_linear"] = np.linalg.norm(2 * c * xi[V] - (xi_sum - zeta_sum))
    res["zeta_u_linear"] = np.linalg.norm(2 * d * zeta[U] - (xi_diff + zeta_diff))
    res["zeta_v_linear"] = np.linalg.norm(2 * d * zeta[V] - (xi_diff - zeta_diff))

    res["post_conjugacy[x]"] = np.linalg.norm(post[X] - SQRT_HALF * (post[U] + post[V]))
    res["post_conjugacy[y]"] = np.linalg.norm(post[Y] - SQRT_HALF * (post[U] - post[V]))
    res["post_orthogonality[xy]"] = abs(np.vdot(post[X], post[Y]))
    res["post_orthogonality[uv]"] = abs(np.vdot(post[U], post[V]))

    for s in Signal:
        dist = p.disturbance(s.basis)
        other = s.basis.signals[1 - s.bit]
        expected = (1.0 - dist) * projector(signal_vector(s)) + dist * projector(signal_vector(other))
        res[f"bob_marginal[{s.value}]"] = op_norm(bob_marginal(post[s], p.probe_dim) - expected)

    return ConstraintReport({k: float(v) for k, v in res.items()}, tolerance)


def isometry_of(obj: Attack) -> NDArray[np.complex128]:
    if isinstance(obj, Strategy):
        return obj.isometry
    return np.column_stack([obj.post[Signal.X], obj.post[Signal.Y]])


def unitary_extension(obj: Attack) -> Operator:
    """Full unitary on signal (x) probe acting on |s>|psi_0>, with |psi_0> the first probe basis vector."""
    w = np.asarray(isometry_of(obj))
    probe_dim = obj.probe_dim
    gram_error = np.max(np.abs(w.conj().T @ w - np.eye(2)))
    if gram_error > TOL.spectral:
        raise RejectedInputError(f"Interaction does not preserve inner products (error {gram_error:.3g})")
    dim = 2 * probe_dim
    completed = orthonormal_completion(w, dim)
    inputs = [0, probe_dim]  # |x>|psi_0>, |y>|psi_0>
    rest = [k for k in range(dim) if k not in inputs]
    unitary = np.empty((dim, dim), dtype=np.complex128)
    unitary[:, inputs] = completed[:, :2]
    unitary[:, rest] = completed[:, 2:]
    return frozen(unitary)


def identity_strategy(probe_dim: int = TWO_QUBIT_PROBE) -> Strategy:
    """No interaction: the probe stays in |psi_0> and Eve learns nothing."""
    if probe_dim < 1:
        raise RejectedInputError(f"probe_dim must be positive, got {probe_dim}")
    psi0 = np.zeros(probe_dim)
    psi0[0] = 1.0
    isometry = np.column_stack([tensor(signal_vector(s), psi0) for s in (Signal.X, Signal.Y)])
    trivial = Povm((np.eye(probe_dim),))
    return Strategy(probe_dim, isometry, trivial, trivial)


def keep_qubit_strategy() -> Strategy:
    """Eve keeps Alice's qubit and sends Bob half of a Bell pair."""
    phi_plus = bell_basis(Basis.XY).phi_plus.reshape(2, 2)
    columns = []
    for s in (Signal.X, Signal.Y):
        kept = signal_vector(s)
        # signal k, probe qubit 1 = Alice's qubit, probe qubit 2 = Bell partner of k
        columns.append(np.einsum("kl,p->kpl", phi_plus, kept).reshape(-1))
    meas = {
        b: Povm(tuple(np.kron(projector(signal_vector(s)), np.eye(2)) for s in b.signals))
        for b in Basis
    }
    return Strategy(TWO_QUBIT_PROBE, np.column_stack(columns), meas[Basis.XY], meas[Basis.UV])


def intercept_resend_strategy() -> Strategy:
    """Measure in a random basis, resend the outcome; the probe records (basis, result).

    Probe index 2*basis + result, with basis 0 = xy and 1 = uv.
    """
    columns = []
    for s in (Signal.X, Signal.Y):
        sent = signal_vector(s)
        image = np.zeros(2 * TWO_QUBIT_PROBE, dtype=np.complex128)
        for index, b in enumerate(Basis):
            for k, outcome in enumerate(b.signals):
                resent = signal_vector(outcome)
                record = np.zeros(TWO_QUBIT_PROBE)
                record[2 * index + k] = 1.0
                image += SQRT_HALF * np.vdot(resent, sent) * tensor(resent, record)
        columns.append(image)
    readout = Povm.from_vectors(list(np.eye(TWO_QUBIT_PROBE)))
    return Strategy(TWO_QUBIT_PROBE, np.column_stack(columns), readout, readout)
