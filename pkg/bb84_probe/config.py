"""Numerical tolerances and seeded random streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RejectedInputError


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = 1e-12  # exact identities (norms, orthogonality)
    spectral: float = 1e-10  # eigensolver output, POVM completeness
    optimization: float = 1e-4  # gap to the bound accepted from a search
    completion: float = 1e-8  # dependence threshold for orthonormal completion


TOL = Tolerances()


def rng_stream(seed: int, stream_id: int) -> np.random.Generator:
    """Counter-based generator for one restart or worker.

    Streams for different ``stream_id`` values are independent, and the same
    ``(seed, stream_id)`` pair always reproduces the same draws.
    """
    if seed < 0 or stream_id < 0:
        raise RejectedInputError(f"seed and stream_id must be non-negative, got {seed}, {stream_id}")
    sequence = np.random.SeedSequence(seed, spawn_key=(stream_id,))
    return np.random.Generator(np.random.Philox(sequence))
