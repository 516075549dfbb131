"""Alice-Bob information, the security threshold, the CHSH signature and tradeoff curves."""

from __future__ import annotations

import logging
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy.optimize import bisect
from scipy.special import xlogy

from .bases import Basis
from .bounds import LN2, bound_point, info_bound, phi
from .errors import RejectedInputError
from .measurement import gain, outcome_stats
from .probe import Strategy, build_optimal, intercept_resend_strategy
from .symmetry import bob_channel

logger = logging.getLogger(__name__)

THRESHOLD_CLOSED_FORM = 0.5 - np.sqrt(2.0) / 4.0
ROOT_XTOL = 1e-15

# polarization-plane angles (degrees) of Alice's and Bob's analysers
CHSH_ALICE = (45.0, 0.0)
CHSH_BOB = (22.5, 67.5)

CSV_FIELDS = ("d", "g_bound", "i_eve_nats", "i_eve_bits", "i_ab_nats", "s_chsh", "secure")


class TradeoffRow(NamedTuple):
    """One point of a tradeoff table.

    ``g_bound`` is always the largest gain allowed at ``d``. ``g_achieved`` is the gain Eve
    actually gets, which only differs from the bound on attack rows. It is not a CSV column.
    """

    d: float
    g_bound: float
    g_achieved: float
    i_eve_nats: float
    i_eve_bits: float
    i_ab_nats: float
    s_chsh: float
    secure: bool
    label: str = "optimal"


class ThresholdReport(NamedTuple):
    closed_form: float
    bisection: float
    chsh_root: float


def _check_d(d: float) -> float:
    if not 0.0 <= d <= 0.5:
        raise RejectedInputError(f"d must lie in [0, 0.5], got {d}")
    return float(d)


def i_ab(d: float) -> float:
    """Alice-Bob mutual information (nats) of a binary symmetric channel with error d."""
    x = _check_d(d)
    return float(LN2 + xlogy(x, x) + xlogy(1.0 - x, 1.0 - x))


def i_ab_phi_form(d: float) -> float:
    return 0.5 * phi(1.0 - 2.0 * _check_d(d))


def chsh_formula(d: float) -> float:
    return 2.0 * np.sqrt(2.0) * (1.0 - 2.0 * _check_d(d))


def threshold() -> ThresholdReport:
    """Disturbance where Eve's information catches up with Bob's, found three ways."""
    by_information = bisect(lambda x: i_ab(x) - info_bound(x), 0.0, 0.5, xtol=ROOT_XTOL)
    by_chsh = bisect(lambda x: chsh_formula(x) - 2.0, 0.0, 0.5, xtol=ROOT_XTOL)
    return ThresholdReport(float(THRESHOLD_CLOSED_FORM), float(by_information), float(by_chsh))


def _polarizer(angle_deg: float) -> np.ndarray:
    """+1 on linear polarization at ``angle_deg``, -1 on the orthogonal one."""
    t = 2.0 * np.deg2rad(angle_deg)
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]])


def chsh_from_strategy(s: Strategy) -> float:
    """CHSH value when Bob's half of a singlet passes through the interaction of ``s``."""
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)
    w = np.asarray(s.isometry)
    # Alice's qubit untouched, Bob's qubit mapped into (Bob, probe)
    joint = (singlet.reshape(2, 2) @ w.T).reshape(4, s.probe_dim)
    rho_ab = joint @ joint.conj().T

    def correlation(a: float, b: float) -> float:
        return float(np.trace(rho_ab @ np.kron(_polarizer(a), _polarizer(b))).real)

    (a1, a2), (b1, b2) = CHSH_ALICE, CHSH_BOB
    return abs(correlation(a1, b1) + correlation(a1, b2) + correlation(a2, b1) - correlation(a2, b2))


def chsh_from_state(d: float) -> float:
    """CHSH value with the optimal attack at disturbance d acting on Bob's half of a singlet."""
    return chsh_from_strategy(build_optimal(_check_d(d), d).strategy())


def tradeoff_row(d: float) -> TradeoffRow:
    point = bound_point(_check_d(d))
    x, i_eve = point.d, point.i_bound_nats
    info_ab = i_ab(x)
    return TradeoffRow(
        d=x,
        g_bound=point.g_bound,
        g_achieved=point.g_bound,
        i_eve_nats=i_eve,
        i_eve_bits=i_eve / LN2,
        i_ab_nats=info_ab,
        s_chsh=chsh_formula(x),
        secure=info_ab > i_eve,
    )


def tradeoff_curve(d_min: float, d_max: float, step: float) -> List[TradeoffRow]:
    """Closed-form rows at d_min, d_min + step, ... up to d_max."""
    if not (0.0 <= d_min < d_max <= 0.5) or step <= 0.0:
        raise RejectedInputError(f"Need 0 <= d_min < d_max <= 0.5 and step > 0, got {d_min}, {d_max}, {step}")
    count = int(np.floor((d_max - d_min) / step + 1e-9)) + 1
    return [tradeoff_row(min(round(d_min + k * step, 12), d_max)) for k in range(count)]


def _attack_row(s: Strategy, label: str) -> TradeoffRow:
    _, report = bob_channel(s)
    g = 0.5 * sum(gain(outcome_stats(s, b, s.measurement(b))).g for b in Basis)
    info_ab = i_ab(min(report.d_avg, 0.5))
    return TradeoffRow(
        d=report.d_avg,
        g_bound=bound_point(min(report.d_avg, 0.5)).g_bound,
        g_achieved=g,
        i_eve_nats=report.i_avg,
        i_eve_bits=report.i_avg / LN2,
        i_ab_nats=info_ab,
        s_chsh=chsh_from_strategy(s),
        secure=info_ab > report.i_avg,
        label=label,
    )


def intercept_resend() -> TradeoffRow:
    """Eve measures in a random basis and resends what she saw."""
    return _attack_row(intercept_resend_strategy(), "intercept-resend")


def single_qubit_curve(
    d_grid: Sequence[float],
    restarts: int = 8,
    seed: int = 0,
    workers: int = 1,
) -> List[TradeoffRow]:
    """Numerical best attack with a one-qubit probe, labeled "numerical"."""
    from .optimizer import SearchConfig, search

    rows = []
    for d in d_grid:
        result = search(SearchConfig(d_target=_check_d(d), probe_dim=2, restarts=restarts, seed=seed, workers=workers))
        logger.info("single-qubit probe at d=%g: I=%.8f (gap %.3g)", d, result.i_achieved, result.gap_to_bound)
        rows.append(_attack_row(result.best, "numerical"))
    return rows
