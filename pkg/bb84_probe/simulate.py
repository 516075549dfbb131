"""Seeded Monte Carlo run of the BB84 protocol with an eavesdropper in the line."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import xlogy

from .bases import Basis, signal_vector
from .errors import RejectedInputError
from .config import rng_stream
from .probe import Strategy, build_optimal, intercept_resend_strategy, unitary_extension

logger = logging.getLogger(__name__)

ATTACKS = ("optimal", "intercept-resend", "none")
BASES = tuple(Basis)  # index 0 = xy, 1 = uv

# counts are indexed [alice_basis, bob_basis, alice_bit, eve_outcome, bob_result]
Counts = NDArray[np.int64]
Tables = Dict[Tuple[int, int], NDArray[np.float64]]


@dataclass(frozen=True)
class ProtocolConfig:
    n_signals: int
    d: float = 0.1
    attack_enabled: bool = True
    seed: int = 0
    workers: int = 1
    attack: str = "optimal"

    def __post_init__(self) -> None:
        if self.n_signals < 1:
            raise RejectedInputError(f"n_signals must be positive, got {self.n_signals}")
        if not 0.0 <= self.d <= 0.5:
            raise RejectedInputError(f"d must lie in [0, 0.5], got {self.d}")
        if not 0 <= self.seed < 2**64:
            raise RejectedInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise RejectedInputError(f"workers must be positive, got {self.workers}")
        if self.attack not in ATTACKS:
            raise RejectedInputError(f"attack must be one of {ATTACKS}, got {self.attack!r}")

    @property
    def effective_attack(self) -> str:
        return self.attack if self.attack_enabled else "none"


@dataclass(frozen=True)
class BasisSummary:
    n_sifted: int
    bob_error_rate: float
    eve_guess_accuracy: Optional[float]


@dataclass(frozen=True)
class TranscriptSummary:
    n_signals: int
    n_sifted: int
    bob_error_rate: float
    eve_guess_accuracy: Optional[float]
    eve_mi_plugin_nats: Optional[float]
    per_basis: Dict[str, BasisSummary] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def joint_table(
    strategy: Strategy,
    alice_basis: Basis,
    bob_basis: Optional[Basis] = None,
    eve_basis: Optional[Basis] = None,
) -> NDArray[np.float64]:
    """P(eve outcome, alice bit, bob result) for one round.

    Alice sends each signal of ``alice_basis`` with probability 1/2; Bob measures in
    ``bob_basis`` and Eve reads her probe with her measurement for ``eve_basis``
    (both default to Alice's basis).
    """
    bob_basis = bob_basis or alice_basis
    eve = strategy.measurement(eve_basis or alice_basis)
    unitary = np.asarray(unitary_extension(strategy))
    p = strategy.probe_dim
    psi0 = np.zeros(p)
    psi0[0] = 1.0
    bob = [signal_vector(s) for s in bob_basis.signals]

    table = np.empty((len(eve), 2, 2))
    for i, sent in enumerate(alice_basis.signals):
        out = (unitary @ np.kron(signal_vector(sent), psi0)).reshape(2, p)
        for r, b in enumerate(bob):
            amp = b.conj() @ out  # unnormalized probe state given Bob's result r
            for lam, e in enumerate(eve):
                table[lam, i, r] = 0.5 * float(np.vdot(amp, e @ amp).real)
    return np.clip(table, 0.0, None)


def joint_distribution(d: float, basis: Basis) -> NDArray[np.float64]:
    """Exact 4 x 2 x 2 table under the optimal attack with d_xy = d_uv = d."""
    if not 0.0 <= d <= 0.5:
        raise RejectedInputError(f"d must lie in [0, 0.5], got {d}")
    return joint_table(build_optimal(d, d).strategy(), basis)


def _noiseless_table(alice_basis: Basis, bob_basis: Basis) -> NDArray[np.float64]:
    table = np.empty((1, 2, 2))
    for i, sent in enumerate(alice_basis.signals):
        for r, got in enumerate(bob_basis.signals):
            table[0, i, r] = 0.5 * abs(np.vdot(signal_vector(got), signal_vector(sent))) ** 2
    return table


def _tables(cfg: ProtocolConfig) -> Tables:
    attack = cfg.effective_attack
    if attack == "none":
        return {(a, b): _noiseless_table(BASES[a], BASES[b]) for a in range(2) for b in range(2)}
    strategy = build_optimal(cfg.d, cfg.d).strategy() if attack == "optimal" else intercept_resend_strategy()
    return {(a, b): joint_table(strategy, BASES[a], BASES[b]) for a in range(2) for b in range(2)}


def _chunk_sizes(n: int, workers: int) -> List[int]:
    base, extra = divmod(n, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def simulate_chunk(tables: Tables, seed: int, stream_id: int, n: int) -> Counts:
    """Sample ``n`` rounds on stream ``stream_id`` and return their counts."""
    rng = rng_stream(seed, stream_id)
    outcomes = next(iter(tables.values())).shape[0]
    alice_basis = rng.integers(0, 2, n)
    bob_basis = rng.integers(0, 2, n)
    bit = rng.integers(0, 2, n)
    uniform = rng.random(n)

    joint = np.empty(n, dtype=np.int64)  # flattened (eve outcome, bob result)
    for (a, b), table in tables.items():
        for i in range(2):
            mask = (alice_basis == a) & (bob_basis == b) & (bit == i)
            cond = table[:, i, :].ravel()
            cdf = np.cumsum(cond / cond.sum())
            cdf[-1] = 1.0
            joint[mask] = np.minimum(np.searchsorted(cdf, uniform[mask], side="right"), cdf.size - 1)

    flat = np.ravel_multi_index((alice_basis, bob_basis, bit, joint // 2, joint % 2), (2, 2, 2, outcomes, 2))
    return np.bincount(flat, minlength=8 * outcomes * 2).reshape(2, 2, 2, outcomes, 2)


def _plugin_information(counts: NDArray[np.int64]) -> float:
    """Plug-in mutual information (nats) of a contingency table of counts."""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    return float(np.sum(xlogy(p, p)) - np.sum(xlogy(px, px)) - np.sum(xlogy(py, py)))


def summarize(counts: Counts, tables: Tables, eve_present: bool) -> TranscriptSummary:
    """Sifted statistics from merged counts; Eve guesses the bit with the larger posterior."""
    per_basis = {}
    sifted_total = errors_total = correct_total = 0
    eve_columns = []
    for k, b in enumerate(BASES):
        sifted = counts[k, k]  # [bit, eve outcome, bob result]
        n_b = int(sifted.sum())
        errors = int(sifted[0, :, 1].sum() + sifted[1, :, 0].sum())
        correct = None
        if eve_present:
            posterior = tables[(k, k)].sum(axis=2)  # [eve outcome, bit]
            guess = np.argmax(posterior, axis=1)
            by_outcome = sifted.sum(axis=2)  # [bit, eve outcome]
            correct = int(by_outcome[guess, np.arange(guess.size)].sum())
            correct_total += correct
            eve_columns.append(by_outcome.T)
        per_basis[b.value] = BasisSummary(
            n_sifted=n_b,
            bob_error_rate=errors / n_b if n_b else 0.0,
            eve_guess_accuracy=(correct / n_b if n_b else 0.0) if eve_present else None,
        )
        sifted_total += n_b
        errors_total += errors

    accuracy = mi = None
    if eve_present:
        accuracy = correct_total / sifted_total if sifted_total else 0.0
        # Eve's side of the contingency table is (announced basis, outcome)
        mi = _plugin_information(np.vstack(eve_columns))
    return TranscriptSummary(
        n_signals=int(counts.sum()),
        n_sifted=sifted_total,
        bob_error_rate=errors_total / sifted_total if sifted_total else 0.0,
        eve_guess_accuracy=accuracy,
        eve_mi_plugin_nats=mi,
        per_basis=per_basis,
    )


def run(cfg: ProtocolConfig) -> TranscriptSummary:
    """Simulate ``cfg.n_signals`` rounds, split over ``cfg.workers`` independent streams.

    Results depend on the worker count as well as the seed.
    """
    tables = _tables(cfg)
    sizes = _chunk_sizes(cfg.n_signals, cfg.workers)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(
                simulate_chunk,
                [tables] * cfg.workers,
                [cfg.seed] * cfg.workers,
                range(cfg.workers),
                sizes,
            ))
    else:
        parts = [simulate_chunk(tables, cfg.seed, 0, cfg.n_signals)]
    counts = np.sum(parts, axis=0)
    summary = summarize(counts, tables, eve_present=cfg.effective_attack != "none")
    logger.info(
        "simulated %d rounds (%s attack): %d sifted, Bob error %.6f",
        cfg.n_signals, cfg.effective_attack, summary.n_sifted, summary.bob_error_rate,
    )
    return summary
