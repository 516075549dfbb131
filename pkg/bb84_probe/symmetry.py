"""Symmetrization of a strategy over Poincaré quarter turns and probe conjugation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List, NamedTuple, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from .bases import Basis, Signal, polar_rotation, signal_vector
from .errors import RejectedInputError
from .hilbert import DensityMatrix, frozen, op_norm, partial_trace, projector, tensor_ops
from .measurement import disturbance, mutual_information, outcome_stats
from .probe import Strategy

logger = logging.getLogger(__name__)

QUARTER_TURNS_DEG = (0, 90, 180, 270)  # Poincaré angles; the polarization turns by half
SCAN_RESOLUTION = 1e-4  # radians between alignment candidates
REFINE_TOL = 1e-12
SNAP_SLACK = 1e-14  # closed-form angle wins ties with the numerical search

Channel = Callable[[DensityMatrix], DensityMatrix]


class Branch(NamedTuple):
    angle_deg: int
    conjugate: bool
    weight: float


class ChannelReport(NamedTuple):
    d_xy: float
    d_uv: float
    d_avg: float
    isotropy_residual: float
    i_avg: float


def _isometry_channel(w: NDArray[np.complex128], probe_dim: int) -> Channel:
    def channel(rho: DensityMatrix) -> DensityMatrix:
        joint = w @ np.asarray(rho) @ w.conj().T
        return partial_trace(joint, (2, probe_dim), [0])

    return channel


def _signal_states() -> List[Tuple[Signal, DensityMatrix]]:
    return [(s, projector(signal_vector(s))) for s in Signal]


def _wrong_projector(s: Signal) -> DensityMatrix:
    return projector(signal_vector(s.basis.signals[1 - s.bit]))


def isotropy_residual(channel: Channel, d: float) -> float:
    """Largest operator-norm distance from (1-2D) rho + D 1 over the four signal states."""
    worst = 0.0
    for _, rho in _signal_states():
        target = (1.0 - 2.0 * d) * rho + d * np.eye(2)
        worst = max(worst, op_norm(channel(rho) - target))
    return worst


def _channel_disturbances(channel: Channel) -> Tuple[float, float]:
    errors = {s: float(np.trace(_wrong_projector(s) @ channel(rho)).real) for s, rho in _signal_states()}
    d_xy = 0.5 * (errors[Signal.X] + errors[Signal.Y])
    d_uv = 0.5 * (errors[Signal.U] + errors[Signal.V])
    return d_xy, d_uv


def _report(channel: Channel, i_avg: float) -> ChannelReport:
    d_xy, d_uv = _channel_disturbances(channel)
    d_avg = 0.5 * (d_xy + d_uv)
    return ChannelReport(d_xy, d_uv, d_avg, isotropy_residual(channel, d_avg), i_avg)


def average_information(s: Strategy) -> float:
    return 0.5 * sum(mutual_information(outcome_stats(s, b, s.measurement(b))) for b in Basis)


def bob_channel(s: Strategy) -> Tuple[Channel, ChannelReport]:
    """Bob's channel (interaction, then trace out the probe) and its summary."""
    channel = _isometry_channel(np.asarray(s.isometry), s.probe_dim)
    report = ChannelReport(
        d_xy=disturbance(s, Basis.XY),
        d_uv=disturbance(s, Basis.UV),
        d_avg=0.0,
        isotropy_residual=0.0,
        i_avg=average_information(s),
    )
    d_avg = 0.5 * (report.d_xy + report.d_uv)
    return channel, report._replace(d_avg=d_avg, isotropy_residual=isotropy_residual(channel, d_avg))


def branch_strategy(base: Strategy, branch: Branch) -> Strategy:
    """Eve turns the signal by R, applies the (possibly conjugated) interaction, then turns it back.

    R maps each signal onto a signal of the same basis for even quarter turns and of
    the conjugate basis for odd ones, so Eve, who knows her branch, reads her probe
    with the base measurement for the basis the interaction actually saw.
    """
    rot = polar_rotation(np.deg2rad(branch.angle_deg))
    w = np.asarray(base.isometry)
    if branch.conjugate:
        w = w.conj()
    iso = tensor_ops(rot.conj().T, np.eye(base.probe_dim)) @ w @ rot
    swapped = (branch.angle_deg // 90) % 2 == 1
    meas = {}
    for b in Basis:
        seen = b.conjugate if swapped else b
        m = base.measurement(seen)
        meas[b] = m.conjugate() if branch.conjugate else m
    return Strategy(base.probe_dim, iso, meas[Basis.XY], meas[Basis.UV])


@dataclass(frozen=True, eq=False)
class SymmetrizedStrategy:
    """Equal-weight mixture of rotated and conjugated copies of ``base``, followed by a polar alignment."""

    base: Strategy
    branches: Tuple[Branch, ...]
    alignment: float

    def __post_init__(self) -> None:
        total = sum(br.weight for br in self.branches)
        if not self.branches or abs(total - 1.0) > 1e-12:
            raise RejectedInputError(f"Branch weights must sum to 1, got {total}")

    @cached_property
    def branch_strategies(self) -> Tuple[Strategy, ...]:
        return tuple(branch_strategy(self.base, br) for br in self.branches)

    def unaligned_channel(self, rho: DensityMatrix) -> DensityMatrix:
        out = np.zeros((2, 2), dtype=np.complex128)
        for br, strat in zip(self.branches, self.branch_strategies):
            out += br.weight * _isometry_channel(np.asarray(strat.isometry), strat.probe_dim)(rho)
        return frozen(out)

    def channel(self, rho: DensityMatrix) -> DensityMatrix:
        turn = polar_rotation(self.alignment)
        return frozen(turn @ self.unaligned_channel(rho) @ turn.conj().T)

    def mutual_information(self) -> float:
        """Branch-weighted basis-averaged information; Eve keeps her branch record."""
        return float(sum(br.weight * average_information(s) for br, s in zip(self.branches, self.branch_strategies)))

    def report(self) -> ChannelReport:
        return _report(self.channel, self.mutual_information())


def _alignment_errors(states: List[Tuple[Signal, np.ndarray]], angles: NDArray[np.float64]) -> NDArray[np.float64]:
    """Average Bob error over the four signals for each candidate alignment angle."""
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    total = np.zeros_like(angles)
    for sig, sigma in states:
        w = signal_vector(sig.basis.signals[1 - sig.bit]).real
        # components of R^dagger |wrong>
        v0 = c * w[0] + s * w[1]
        v1 = -s * w[0] + c * w[1]
        total += v0**2 * sigma[0, 0].real + v1**2 * sigma[1, 1].real + 2 * v0 * v1 * sigma[0, 1].real
    return total / 4.0


def _best_alignment(mixture: SymmetrizedStrategy) -> float:
    states = [(s, np.asarray(mixture.unaligned_channel(rho))) for s, rho in _signal_states()]

    def error(theta: float) -> float:
        return float(_alignment_errors(states, np.array([theta]))[0])

    grid = np.arange(0.0, 2 * np.pi, SCAN_RESOLUTION)
    errors = _alignment_errors(states, grid)
    start = float(grid[int(np.argmin(errors))])
    candidates = [0.0, start]
    try:
        refined = minimize_scalar(
            error,
            bracket=(start - SCAN_RESOLUTION, start + SCAN_RESOLUTION),
            method="golden",
            tol=REFINE_TOL,
        )
        candidates.append(float(refined.x))
    except (RuntimeError, ValueError):
        # flat error curve (Bob receives noise): any angle is optimal
        logger.debug("no bracket for alignment refinement, keeping scan result")

    # the mixed equatorial Bloch map is a scaled rotation, so the exact optimum is
    # minus the azimuth of Bob's image of |x>
    sigma_x = states[0][1]
    n1, n2 = (sigma_x[0, 0] - sigma_x[1, 1]).real, 2.0 * sigma_x[0, 1].real
    best = min(candidates, key=error)
    if np.hypot(n1, n2) > 0.0:
        snapped = float(-np.arctan2(n2, n1))
        if error(snapped) <= error(best) + SNAP_SLACK:
            best = snapped
    logger.debug("alignment angle %.12g rad, D=%.12g", best, error(best))
    return best


def symmetrize(s: Strategy) -> SymmetrizedStrategy:
    """Mix the eight rotated/conjugated copies of ``s`` and align Bob's states with Alice's."""
    weight = 1.0 / (2 * len(QUARTER_TURNS_DEG))
    branches = tuple(
        Branch(angle, conj, weight) for conj in (False, True) for angle in QUARTER_TURNS_DEG
    )
    mixture = SymmetrizedStrategy(base=s, branches=branches, alignment=0.0)
    return SymmetrizedStrategy(base=s, branches=branches, alignment=_best_alignment(mixture))


def damneq_check(sym: SymmetrizedStrategy) -> Tuple[float, float]:
    """Fit rho_Bob = (1-2D) rho + D 1 over the four signals; return (D, max deviation)."""
    d_xy, d_uv = _channel_disturbances(sym.channel)
    d = 0.5 * (d_xy + d_uv)
    return d, isotropy_residual(sym.channel, d)
