"""Small-dimension complex linear algebra: states, operators, tensor products, partial trace."""

from __future__ import annotations

from math import prod
from typing import Iterable, List, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .config import TOL
from .errors import RejectedInputError


StateVector = NDArray[np.complex128]
Operator = NDArray[np.complex128]
DensityMatrix = NDArray[np.complex128]

MAX_DIM = 16  # largest composite space in scope (signal qubit plus a 3-qubit probe)


class Eigensystem(NamedTuple):
    values: NDArray[np.float64]  # descending
    vectors: Operator  # column k belongs to values[k]


def frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``array``."""
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


def _check_dim(dim: int) -> None:
    if dim < 1 or dim > MAX_DIM:
        raise RejectedInputError(f"Dimension {dim} outside supported range 1..{MAX_DIM}")


def state(amps: ArrayLike, normalized: bool = True) -> StateVector:
    """Build a state vector; ``normalized`` vectors must have unit norm."""
    vec = np.asarray(amps, dtype=np.complex128).reshape(-1)
    _check_dim(vec.size)
    if normalized:
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > TOL.algebraic:
            raise RejectedInputError(f"State vector has norm {norm:.15g}, expected 1")
    return frozen(vec)


def operator(entries: ArrayLike, hermitian: bool = False, unitary: bool = False) -> Operator:
    """Build a square operator, optionally checking that it is Hermitian or unitary."""
    mat = np.asarray(entries, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise RejectedInputError(f"Operator must be square, got shape {mat.shape}")
    if hermitian and not is_hermitian(mat):
        raise RejectedInputError("Operator labeled Hermitian is not Hermitian")
    if unitary:
        residual = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if residual > TOL.algebraic:
            raise RejectedInputError(f"Operator labeled unitary has residual {residual:.3g}")
    return frozen(mat)


def density(entries: ArrayLike) -> DensityMatrix:
    """Build a density matrix, checking Hermiticity, unit trace and positivity."""
    rho = np.asarray(entries, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise RejectedInputError(f"Density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise RejectedInputError("Density matrix is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > TOL.algebraic:
        raise RejectedInputError(f"Density matrix has trace {trace:.15g}")
    smallest = np.linalg.eigvalsh(rho).min()
    if smallest < -TOL.spectral:
        raise RejectedInputError(f"Density matrix has negative eigenvalue {smallest:.3g}")
    return frozen(rho)


def is_hermitian(mat: np.ndarray, tol: float = TOL.algebraic) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T), initial=0.0) <= tol)


def tensor(*vectors: ArrayLike) -> StateVector:
    """Kronecker product, first factor most significant."""
    if not vectors:
        raise RejectedInputError("tensor needs at least one factor")
    out = np.ones(1, dtype=np.complex128)
    for v in vectors:
        out = np.kron(out, np.asarray(v, dtype=np.complex128).reshape(-1))
    _check_dim(out.size)
    return frozen(out)


def tensor_ops(*ops: ArrayLike) -> Operator:
    out = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=np.complex128))
    return frozen(out)


def projector(vec: ArrayLike) -> Operator:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return frozen(np.outer(v, v.conj()))


def partial_trace(rho: ArrayLike, factor_dims: Sequence[int], keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``.

    An empty ``keep`` traces everything and yields the 1x1 total trace.
    """
    mat = np.asarray(rho, dtype=np.complex128)
    dims = tuple(int(d) for d in factor_dims)
    if any(d < 1 for d in dims) or mat.ndim != 2 or mat.shape != (prod(dims), prod(dims)):
        raise RejectedInputError(
            f"Factor dimensions {dims} do not match operator of shape {mat.shape}"
        )
    kept = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in kept):
        raise RejectedInputError(f"Kept factors {kept} out of range for {len(dims)} factors")

    n = len(dims)
    rows = list(range(n))
    cols = [k if k not in kept else n + k for k in range(n)]
    out_labels = [k for k in kept] + [n + k for k in kept]
    reduced = np.einsum(mat.reshape(dims + dims), rows + cols, out_labels)
    kept_dim = prod(dims[k] for k in kept)
    return frozen(np.asarray(reduced).reshape(kept_dim, kept_dim))


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first non-negligible component is real positive."""
    for c in vec:
        if abs(c) > TOL.spectral:
            return vec * (abs(c) / c)
    return vec


def eig_hermitian(m: ArrayLike) -> Eigensystem:
    """Eigendecomposition with deterministic ordering and phases.

    Eigenvalues come out descending. Within a group of eigenvalues closer than the
    spectral tolerance, vectors are ordered by the real parts of their phase-fixed
    components, largest first.
    """
    mat = np.asarray(m, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise RejectedInputError(f"Operator must be square, got shape {mat.shape}")
    if not is_hermitian(mat):
        raise RejectedInputError("eig_hermitian requires a Hermitian operator")
    values, vectors = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    pairs = [(float(values[k]), fix_phase(vectors[:, k])) for k in range(len(values))]
    pairs.sort(key=lambda p: -p[0])

    ordered: List[tuple] = []
    group: List[tuple] = []
    for pair in pairs:
        if group and abs(group[0][0] - pair[0]) > TOL.spectral:
            ordered.extend(_order_group(group))
            group = []
        group.append(pair)
    ordered.extend(_order_group(group))

    vals = np.array([p[0] for p in ordered])
    vecs = np.column_stack([p[1] for p in ordered])
    return Eigensystem(frozen(vals), frozen(vecs))


def _order_group(group: List[tuple]) -> List[tuple]:
    if len(group) < 2:
        return group
    return sorted(group, key=lambda p: tuple(np.round(p[1].real, 12)), reverse=True)


def sqrt_psd(m: ArrayLike) -> Operator:
    """Positive square root of a PSD operator, clipping eigenvalues below zero."""
    values, vectors = np.linalg.eigh(0.5 * (np.asarray(m) + np.asarray(m).conj().T))
    root = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * root) @ vectors.conj().T


def orthonormal_completion(columns: ArrayLike, dim: int) -> Operator:
    """Extend orthonormal ``columns`` to a full unitary.

    Standard basis vectors are tried in index order; a candidate whose component
    orthogonal to the current span has norm below the completion threshold is skipped.
    """
    basis = [np.asarray(c, dtype=np.complex128) for c in np.asarray(columns).T]
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    if basis and np.max(np.abs(gram - np.eye(len(basis)))) > TOL.spectral:
        raise RejectedInputError("Columns to complete are not orthonormal")
    for index in range(dim):
        if len(basis) == dim:
            break
        candidate = np.zeros(dim, dtype=np.complex128)
        candidate[index] = 1.0
        for b in basis:
            candidate = candidate - np.vdot(b, candidate) * b
        norm = np.linalg.norm(candidate)
        if norm < TOL.completion:
            continue
        candidate = candidate / norm
        # second pass keeps orthogonality at machine precision
        for b in basis:
            candidate = candidate - np.vdot(b, candidate) * b
        basis.append(candidate / np.linalg.norm(candidate))
    if len(basis) != dim:
        raise RejectedInputError(f"Could not complete {len(basis)} columns to dimension {dim}")
    return frozen(np.column_stack(basis))


def op_norm(m: ArrayLike) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(m), ord=2))
