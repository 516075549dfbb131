"""POVMs on the probe, outcome statistics, information gain and mutual information."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, NamedTuple, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .bases import Basis, signal_vector
from .bounds import phi
from .config import TOL
from .errors import RejectedInputError
from .hilbert import (
    DensityMatrix,
    Operator,
    eig_hermitian,
    frozen,
    is_hermitian,
    projector,
    sqrt_psd,
    tensor,
    tensor_ops,
)

if TYPE_CHECKING:
    from .probe import ProbeInteraction, Strategy

    Attack = Union[ProbeInteraction, Strategy]


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive operators on the probe space summing to the identity."""

    elements: Tuple[Operator, ...]

    def __post_init__(self) -> None:
        elems = tuple(frozen(np.asarray(e, dtype=np.complex128)) for e in self.elements)
        if not elems:
            raise RejectedInputError("A POVM needs at least one element")
        dim = elems[0].shape[0]
        total = np.zeros((dim, dim), dtype=np.complex128)
        for k, e in enumerate(elems):
            if e.shape != (dim, dim):
                raise RejectedInputError(f"POVM element {k} has shape {e.shape}, expected {(dim, dim)}")
            if not is_hermitian(e, TOL.spectral):
                raise RejectedInputError(f"POVM element {k} is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (e + e.conj().T)).min() < -TOL.spectral:
                raise RejectedInputError(f"POVM element {k} is not positive semidefinite")
            total += e
        residual = np.max(np.abs(total - np.eye(dim)))
        if residual > TOL.spectral:
            raise RejectedInputError(f"POVM elements sum to identity only within {residual:.3g}")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def from_vectors(cls, vectors: Sequence[ArrayLike]) -> "Povm":
        """Rank-1 POVM |w_k><w_k| from (possibly subnormalized) vectors."""
        return cls(tuple(projector(v) for v in vectors))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Operator]:
        return iter(self.elements)

    def conjugate(self) -> "Povm":
        return Povm(tuple(e.conj() for e in self.elements))

    def transformed(self, unitary: ArrayLike) -> "Povm":
        """Elements U E U^dagger."""
        u = np.asarray(unitary)
        return Povm(tuple(u @ e @ u.conj().T for e in self.elements))


@dataclass(frozen=True, eq=False)
class MeasurementStats:
    basis: Basis
    likelihood: NDArray[np.float64]  # P[lambda, i]: probability of outcome lambda given signal i
    q: NDArray[np.float64]
    posterior: NDArray[np.float64]  # Q[lambda, i]
    g_per_outcome: NDArray[np.float64]
    prior: NDArray[np.float64] = field(default_factory=lambda: frozen(np.array([0.5, 0.5])))

    @property
    def outcomes(self) -> int:
        return len(self.q)


class GainReport(NamedTuple):
    g: float
    guess_error: float


class SignReport(NamedTuple):
    basis: Basis
    d_conj: float
    ratio: float
    eps: Tuple[int, ...]
    residuals: NDArray[np.float64]

    @property
    def attained(self) -> bool:
        return bool(np.all(self.residuals < TOL.spectral))


# Array-level helpers shared with the optimizer's inner loop.


def probe_marginal(image: ArrayLike, probe_dim: int) -> NDArray[np.complex128]:
    """Eve's reduced state of a signal-times-probe vector (signal is factor 0)."""
    m = np.asarray(image).reshape(2, probe_dim)
    return m.T @ m.conj()


def bob_marginal(image: ArrayLike, probe_dim: int) -> NDArray[np.complex128]:
    """Bob's reduced state of a signal-times-probe vector."""
    m = np.asarray(image).reshape(2, probe_dim)
    return m @ m.conj().T


def likelihoods(rho0: ArrayLike, rho1: ArrayLike, elements: Sequence[ArrayLike]) -> NDArray[np.float64]:
    stack = np.asarray(elements)
    p0 = np.einsum("ij,lji->l", np.asarray(rho0), stack).real
    p1 = np.einsum("ij,lji->l", np.asarray(rho1), stack).real
    return np.clip(np.column_stack([p0, p1]), 0.0, None)


def stats_from_likelihoods(likelihood: ArrayLike, basis: Basis) -> MeasurementStats:
    """Outcome probabilities, Bayes posteriors and per-outcome gains for equal priors."""
    lik = np.asarray(likelihood, dtype=np.float64)
    q = 0.5 * lik.sum(axis=1)
    posterior = np.full_like(lik, 0.5)
    seen = q > 0.0
    posterior[seen] = 0.5 * lik[seen] / q[seen, None]
    g = np.clip(np.abs(posterior[:, 0] - posterior[:, 1]), 0.0, 1.0)
    return MeasurementStats(
        basis=basis,
        likelihood=frozen(lik),
        q=frozen(q),
        posterior=frozen(posterior),
        g_per_outcome=frozen(g),
    )


def information_from_stats(q: NDArray[np.float64], g: NDArray[np.float64]) -> float:
    return float(0.5 * np.sum(q * phi(g)))


# Public operations


def basis_images(p: "Attack", b: Basis) -> Tuple[np.ndarray, np.ndarray]:
    s0, s1 = b.signals
    return p.images[s0], p.images[s1]


def _check_povm(p: "Attack", m: Povm) -> None:
    if m.dim != p.probe_dim:
        raise RejectedInputError(f"POVM acts on dimension {m.dim}, probe has dimension {p.probe_dim}")


def outcome_stats(p: "Attack", b: Basis, m: Povm) -> MeasurementStats:
    """Statistics of Eve's measurement ``m`` after Alice announces basis ``b``."""
    _check_povm(p, m)
    img0, img1 = basis_images(p, b)
    rho0 = probe_marginal(img0, p.probe_dim)
    rho1 = probe_marginal(img1, p.probe_dim)
    return stats_from_likelihoods(likelihoods(rho0, rho1, m.elements), b)


def gain(stats: MeasurementStats) -> GainReport:
    g = float(np.sum(stats.q * stats.g_per_outcome))
    return GainReport(g=g, guess_error=0.5 * (1.0 - g))


def mutual_information(stats: MeasurementStats) -> float:
    """Eve's information on Alice's bit, in nats."""
    return information_from_stats(stats.q, stats.g_per_outcome)


def binned_stats(stats: MeasurementStats) -> MeasurementStats:
    """Two-outcome statistics after binning outcomes by the signal they favour."""
    favours_first = stats.posterior[:, 0] >= stats.posterior[:, 1]
    lik = np.vstack([
        stats.likelihood[favours_first].sum(axis=0),
        stats.likelihood[~favours_first].sum(axis=0),
    ])
    return stats_from_likelihoods(lik, stats.basis)


def helstrom_povm(rho0: DensityMatrix, rho1: DensityMatrix) -> Povm:
    """Projective measurement on the eigenbasis of rho0 - rho1."""
    r0, r1 = np.asarray(rho0), np.asarray(rho1)
    if r0.shape != r1.shape:
        raise RejectedInputError(f"Density matrices differ in shape: {r0.shape} vs {r1.shape}")
    _, vectors = eig_hermitian(r0 - r1)
    return Povm.from_vectors(list(vectors.T))


def _product_vectors(b: Basis) -> Tuple[np.ndarray, ...]:
    e0, e1 = (signal_vector(s) for s in b.signals)
    # outcome order: e0e0, e1e0, e0e1, e1e1 (probe qubit 1 written first)
    return tensor(e0, e0), tensor(e1, e0), tensor(e0, e1), tensor(e1, e1)


def optimal_povm(p: "Attack", b: Basis) -> Povm:
    """Closed-form product-basis measurement for the two-qubit probe."""
    if p.probe_dim != 4:
        raise RejectedInputError(f"optimal_povm needs a two-qubit probe, got dimension {p.probe_dim}")
    return Povm.from_vectors(_product_vectors(b))


def second_qubit_povm(b: Basis) -> Povm:
    """Measure only probe qubit 2, in basis ``b``."""
    return Povm(tuple(tensor_ops(np.eye(2), projector(signal_vector(s))) for s in b.signals))


def disturbance(p: "Attack", b: Basis) -> float:
    """Probability that Bob, measuring in ``b``, reads the wrong bit of a ``b`` signal."""
    total = 0.0
    for s in b.signals:
        wrong = b.signals[1 - s.bit]
        sigma = bob_marginal(p.images[s], p.probe_dim)
        w = signal_vector(wrong)
        total += float(np.vdot(w, sigma @ w).real)
    return 0.5 * total


def equality_conditions(p: "Attack", m: Povm, b: Basis) -> SignReport:
    """Proportionality tests behind the information bound, one sign per outcome.

    With Alice announcing ``b``, the conjugate-basis images are projected by
    Bob's projectors and the square roots of Eve's elements. Equality in the
    bound requires V_lu = eps r U_lu and U_lv = eps r V_lv with r = sqrt(D/(1-D)),
    D the conjugate-basis disturbance.
    """
    _check_povm(p, m)
    conj = b.conjugate
    s0, s1 = conj.signals
    d_conj = disturbance(p, conj)
    ratio = np.sqrt(d_conj / (1.0 - d_conj)) if d_conj < 1.0 else np.inf
    img0, img1 = p.images[s0], p.images[s1]
    bob0 = projector(signal_vector(s0))
    bob1 = projector(signal_vector(s1))

    eps = []
    residuals = []
    for element in m.elements:
        root = sqrt_psd(element)
        a0, b0 = tensor_ops(bob0, root) @ img0, tensor_ops(bob0, root) @ img1
        a1, b1 = tensor_ops(bob1, root) @ img0, tensor_ops(bob1, root) @ img1
        overlap = (np.vdot(a0, b0) + np.vdot(a1, b1)).real
        sign = -1 if overlap < 0 else 1
        eps.append(sign)
        if not np.isfinite(ratio):
            residuals.append(np.inf)
            continue
        residuals.append(max(
            np.linalg.norm(b0 - sign * ratio * a0),
            np.linalg.norm(a1 - sign * ratio * b1),
        ))
    return SignReport(
        basis=b,
        d_conj=d_conj,
        ratio=float(ratio),
        eps=tuple(eps),
        residuals=frozen(np.array(residuals)),
    )
