"""The phi kernel, information-disturbance bounds and their concavity check."""

from __future__ import annotations

from typing import List, NamedTuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import xlogy

from .errors import RejectedInputError

LN2 = float(np.log(2.0))
SMALL_D_POINTS = (1e-3, 1e-4, 1e-5)  # disturbances probed for the I ~ 2D limit
SLOPE_TOLERANCE = 0.05  # relative distance from 2 accepted at the smallest point
CONCAVITY_SLACK = 1e-8  # largest second difference accepted as "not convex"


class BoundPoint(NamedTuple):
    d: float
    g_bound: float
    i_bound_nats: float


class SlopeReport(NamedTuple):
    points: List[float]
    ratios: List[float]
    passed: bool


class ConcavityReport(NamedTuple):
    grid_step: float
    max_second_difference: float
    max_second_derivative: float
    passed: bool


def _check_range(name: str, value: ArrayLike, low: float, high: float) -> NDArray[np.float64]:
    arr = np.asarray(value, dtype=np.float64)
    if np.any(~np.isfinite(arr)) or np.any(arr < low) or np.any(arr > high):
        raise RejectedInputError(f"{name} must lie in [{low}, {high}], got {value}")
    return arr


def phi(z: ArrayLike) -> Union[float, NDArray[np.float64]]:
    """(1+z)ln(1+z) + (1-z)ln(1-z), with 0 ln 0 = 0. Accepts scalars or arrays."""
    arr = _check_range("z", z, 0.0, 1.0)
    out = xlogy(1.0 + arr, 1.0 + arr) + xlogy(1.0 - arr, 1.0 - arr)
    return float(out) if out.ndim == 0 else out


def gain_bound(d: float) -> float:
    """Largest information gain compatible with conjugate-basis disturbance d."""
    x = float(_check_range("d", d, 0.0, 1.0))
    return 2.0 * np.sqrt(x * (1.0 - x))


def info_bound(d: float) -> float:
    """Largest mutual information (nats) compatible with disturbance d in [0, 1/2]."""
    x = float(_check_range("d", d, 0.0, 0.5))
    return 0.5 * phi(min(gain_bound(x), 1.0))


def bound_point(d: float) -> BoundPoint:
    return BoundPoint(d=float(d), g_bound=gain_bound(d), i_bound_nats=info_bound(d))


def small_d_slope_check() -> SlopeReport:
    """info_bound(d)/d approaches 2 monotonically as d shrinks."""
    points = list(SMALL_D_POINTS)
    ratios = [info_bound(d) / d for d in points]
    distances = [abs(r - 2.0) for r in ratios]
    monotone = all(b < a for a, b in zip(distances, distances[1:]))
    passed = monotone and distances[-1] <= SLOPE_TOLERANCE * 2.0
    return SlopeReport(points=points, ratios=ratios, passed=passed)


def log_ratio_term(z: ArrayLike) -> NDArray[np.float64]:
    """2z - ln((1+z)/(1-z)), the bracket whose sign decides concavity."""
    arr = np.asarray(z, dtype=np.float64)
    return 2.0 * arr - np.log((1.0 + arr) / (1.0 - arr))


def concavity_check(grid_step: float) -> ConcavityReport:
    """Second differences of x -> phi(2 sqrt(x(1-x))) on the open grid inside (0, 1/2)."""
    if not 0.0 < grid_step < 0.1:
        raise RejectedInputError(f"grid_step must lie in (0, 0.1), got {grid_step}")
    x = np.arange(grid_step, 0.5 - grid_step / 2, grid_step)
    z = np.minimum(2.0 * np.sqrt(x * (1.0 - x)), 1.0)
    f = phi(z)
    second = f[2:] - 2.0 * f[1:-1] + f[:-2]

    # z < 1 strictly on the open grid, so the closed form is finite there
    zi = z[(z > 0.0) & (z < 1.0)]
    closed = (4.0 / zi**3) * log_ratio_term(zi)
    max_second = float(second.max())
    max_closed = float(closed.max()) if closed.size else 0.0
    return ConcavityReport(
        grid_step=grid_step,
        max_second_difference=max_second,
        max_second_derivative=max_closed,
        passed=max_second <= CONCAVITY_SLACK and max_closed <= 0.0,
    )
