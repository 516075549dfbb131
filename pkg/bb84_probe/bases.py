"""Signal bases, Bell bases and the Poincaré-sphere picture of a qubit."""

from __future__ import annotations

from enum import Enum
from typing import Dict, NamedTuple, Tuple

import numpy as np

from .config import TOL
from .errors import RejectedInputError
from .hilbert import DensityMatrix, Operator, StateVector, density, frozen, tensor

SQRT_HALF = np.sqrt(0.5)


class Basis(Enum):
    XY = "xy"
    UV = "uv"

    @property
    def signals(self) -> Tuple["Signal", "Signal"]:
        """The two signals of this basis, bit 0 first."""
        return (Signal.X, Signal.Y) if self is Basis.XY else (Signal.U, Signal.V)

    @property
    def conjugate(self) -> "Basis":
        return Basis.UV if self is Basis.XY else Basis.XY


class Signal(Enum):
    X = "x"
    Y = "y"
    U = "u"
    V = "v"

    @property
    def basis(self) -> Basis:
        return Basis.XY if self in (Signal.X, Signal.Y) else Basis.UV

    @property
    def bit(self) -> int:
        return 0 if self in (Signal.X, Signal.U) else 1


_SIGNAL_AMPS: Dict[Signal, Tuple[float, float]] = {
    Signal.X: (1.0, 0.0),
    Signal.Y: (0.0, 1.0),
    Signal.U: (SQRT_HALF, SQRT_HALF),
    Signal.V: (SQRT_HALF, -SQRT_HALF),
}


def signal_vector(s: Signal) -> StateVector:
    """Amplitudes of a signal in the xy (computational) basis."""
    return frozen(np.array(_SIGNAL_AMPS[s], dtype=np.complex128))


class BellBasis(NamedTuple):
    phi_plus: StateVector
    phi_minus: StateVector
    psi_plus: StateVector
    psi_minus: StateVector


def bell_basis(b: Basis) -> BellBasis:
    """Bell vectors built from the two signals of ``b``."""
    e0, e1 = (signal_vector(s) for s in b.signals)
    return BellBasis(
        phi_plus=frozen((tensor(e0, e0) + tensor(e1, e1)) * SQRT_HALF),
        phi_minus=frozen((tensor(e0, e0) - tensor(e1, e1)) * SQRT_HALF),
        psi_plus=frozen((tensor(e0, e1) + tensor(e1, e0)) * SQRT_HALF),
        psi_minus=frozen((tensor(e0, e1) - tensor(e1, e0)) * SQRT_HALF),
    )


# Poincaré axes: n1 along x/y, n2 along u/v, n3 the polar (circular) axis.
SIGMA_1 = frozen(np.array([[1, 0], [0, -1]], dtype=np.complex128))
SIGMA_2 = frozen(np.array([[0, 1], [1, 0]], dtype=np.complex128))
SIGMA_3 = frozen(np.array([[0, -1j], [1j, 0]], dtype=np.complex128))


class BlochVector(NamedTuple):
    n1: float
    n2: float
    n3: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.n1**2 + self.n2**2 + self.n3**2))


def bloch_of(rho: DensityMatrix) -> BlochVector:
    """Poincaré-sphere coordinates of a qubit density matrix."""
    mat = density(rho)
    if mat.shape != (2, 2):
        raise RejectedInputError(f"bloch_of needs a qubit state, got shape {mat.shape}")
    return BlochVector(*(float(np.trace(mat @ s).real) for s in (SIGMA_1, SIGMA_2, SIGMA_3)))


def state_of(n: BlochVector) -> DensityMatrix:
    vec = BlochVector(*n)
    if vec.norm > 1.0 + TOL.algebraic:
        raise RejectedInputError(f"Bloch vector norm {vec.norm:.15g} exceeds 1")
    mat = 0.5 * (np.eye(2) + vec.n1 * SIGMA_1 + vec.n2 * SIGMA_2 + vec.n3 * SIGMA_3)
    return frozen(mat)


def polar_rotation(angle: float) -> Operator:
    """Rotation of the Poincaré sphere about its polar axis by ``angle`` radians.

    The polarization plane turns by half the angle, so a Poincaré angle of
    pi/2 takes |x> to |u>.
    """
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return frozen(np.array([[c, -s], [s, c]], dtype=np.complex128))
