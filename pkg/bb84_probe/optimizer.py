"""Brute-force search over general interactions and measurements."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .bases import SQRT_HALF, Basis
from .bounds import gain_bound, info_bound, phi
from .config import TOL, rng_stream
from .errors import DegenerateParametersError, RejectedInputError
from .measurement import Povm, disturbance, helstrom_povm
from .probe import Strategy
from .symmetry import average_information

logger = logging.getLogger(__name__)

DEFAULT_PENALTY_WEIGHT = 1e3
POLISH_FACTOR = 100.0  # penalty multiplier for the final polish
DEFAULT_RESTARTS = 20
DEFAULT_MAX_ITERS = 20000  # objective evaluations per stage
DEFAULT_TOLERANCE = 1e-9
WARMUP_MAX_ITERS = 4000  # the low-penalty first stage only needs to land near the curve
WARMUP_TOLERANCE = 1e-6
EXTRA_OUTCOME_SCALE = 1e-3  # size of the random rows that seed POVM outcomes beyond the probe dimension
DEGENERACY_THRESHOLD = 1e-8  # relative size of a Gram-Schmidt pivot below which we resample
MAX_RESAMPLES = 100
DEGENERATE_OBJECTIVE = 1e6  # returned to the minimizer for undecodable points
SOUNDNESS_SLACK = 1e-9

MEASUREMENT_MODES = ("helstrom", "projective", "povm")
METHODS = {"powell": "Powell", "nelder-mead": "Nelder-Mead"}


@dataclass(frozen=True)
class SearchConfig:
    d_target: float
    probe_dim: int = 4
    penalty_weight: float = DEFAULT_PENALTY_WEIGHT
    restarts: int = DEFAULT_RESTARTS
    max_iters: int = DEFAULT_MAX_ITERS
    seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE
    measurement: str = "projective"
    extra_outcomes: int = 0
    method: str = "powell"
    workers: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.d_target <= 0.5:
            raise RejectedInputError(f"d_target must lie in [0, 0.5], got {self.d_target}")
        if self.probe_dim not in (2, 4):
            raise RejectedInputError(f"probe_dim must be 2 or 4, got {self.probe_dim}")
        for name in ("penalty_weight", "tolerance"):
            if getattr(self, name) <= 0:
                raise RejectedInputError(f"{name} must be positive")
        for name in ("restarts", "max_iters", "workers"):
            if getattr(self, name) < 1:
                raise RejectedInputError(f"{name} must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise RejectedInputError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.measurement not in MEASUREMENT_MODES:
            raise RejectedInputError(f"measurement must be one of {MEASUREMENT_MODES}")
        if self.extra_outcomes < 0 or (self.extra_outcomes and self.measurement != "povm"):
            raise RejectedInputError("extra_outcomes needs measurement='povm' and must be non-negative")
        if self.method not in METHODS:
            raise RejectedInputError(f"method must be one of {sorted(METHODS)}")


@dataclass(frozen=True, eq=False)
class ParamStrategy:
    """Unconstrained real parameters for an interaction and, unless Helstrom, Eve's measurements."""

    probe_dim: int
    params: NDArray[np.float64]
    measurement: str = "projective"
    extra_outcomes: int = 0

    def decode(self) -> Strategy:
        return decode(self.params, self.probe_dim, self.measurement, self.extra_outcomes)


class RestartResult(NamedTuple):
    index: int
    params: NDArray[np.float64]
    objective: float
    i_avg: float
    d_avg: float
    converged: bool
    evaluations: int
    soundness_violation: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    config: SearchConfig
    best: Strategy
    params: NDArray[np.float64]
    i_achieved: float
    d_achieved: float
    gap_to_bound: float
    objective: float
    converged: bool
    restart_objectives: Tuple[float, ...]
    soundness_violation: float
    evaluations: int

    def report(self) -> Dict[str, object]:
        """Run report without the strategy itself (see export.strategy_to_dict)."""
        return {
            "config": asdict(self.config),
            "i_achieved_nats": self.i_achieved,
            "d_achieved": self.d_achieved,
            "i_bound_nats": self.i_achieved + self.gap_to_bound,
            "gap_to_bound_nats": self.gap_to_bound,
            "objective": self.objective,
            "converged": self.converged,
            "restart_objectives": list(self.restart_objectives),
            "soundness_violation_max": self.soundness_violation,
            "evaluations": self.evaluations,
        }


class SaturationRow(NamedTuple):
    d: float
    i_achieved: float
    d_achieved: float
    gap: float
    passed: bool
    converged: bool


def _outcomes(probe_dim: int, measurement: str, extra_outcomes: int) -> int:
    return probe_dim + extra_outcomes if measurement != "helstrom" else 0


def param_count(probe_dim: int, measurement: str = "projective", extra_outcomes: int = 0) -> int:
    isometry = 2 * 2 * (2 * probe_dim)  # real and imaginary parts of two vectors
    outs = _outcomes(probe_dim, measurement, extra_outcomes)
    return isometry + 2 * (2 * outs * probe_dim)


def _orthonormalize(raw: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Gram-Schmidt on the columns of ``raw``, phases fixed so the pivots are real positive."""
    q, r = np.linalg.qr(raw)
    pivots = np.diag(r)
    scale = max(1.0, float(np.max(np.linalg.norm(raw, axis=0))))
    if np.min(np.abs(pivots)) < DEGENERACY_THRESHOLD * scale:
        raise DegenerateParametersError("raw vectors are nearly linearly dependent")
    return q * (pivots / np.abs(pivots))


def _split(params: NDArray[np.float64], probe_dim: int, measurement: str, extra_outcomes: int):
    expected = param_count(probe_dim, measurement, extra_outcomes)
    if params.shape != (expected,):
        raise RejectedInputError(f"Expected {expected} parameters, got shape {params.shape}")
    n_iso = 8 * probe_dim
    iso = params[:n_iso].reshape(2, 2 * probe_dim, 2)
    outs = _outcomes(probe_dim, measurement, extra_outcomes)
    meas = []
    if outs:
        block = 2 * outs * probe_dim
        for k in range(2):
            raw = params[n_iso + k * block : n_iso + (k + 1) * block].reshape(2, outs, probe_dim)
            meas.append(raw[0] + 1j * raw[1])
    return iso[0] + 1j * iso[1], meas


def _readout_vectors(raw: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Rows w_j of the Naimark isometry; |w_j><w_j| sum to the identity."""
    return _orthonormalize(raw).conj()


def decode(
    params: Sequence[float],
    probe_dim: int = 4,
    measurement: str = "projective",
    extra_outcomes: int = 0,
) -> Strategy:
    """Map unconstrained parameters onto a valid Strategy."""
    x = np.asarray(params, dtype=np.float64)
    raw_iso, raw_meas = _split(x, probe_dim, measurement, extra_outcomes)
    isometry = _orthonormalize(raw_iso)
    if measurement == "helstrom":
        rho = _probe_states(_signal_images(isometry, probe_dim))
        meas = [helstrom_povm(rho[k, 0], rho[k, 1]) for k in range(2)]
    else:
        meas = [Povm.from_vectors(list(_readout_vectors(raw))) for raw in raw_meas]
    return Strategy(probe_dim, isometry, meas[0], meas[1])


def encode(s: Strategy, measurement: str = "projective") -> NDArray[np.float64]:
    """Parameters that decode back to ``s`` (rank-1 measurements only)."""
    w = np.asarray(s.isometry)
    parts = [np.stack([w.real, w.imag]).reshape(-1)]
    if measurement != "helstrom":
        for b in Basis:
            rows = []
            for element in s.measurement(b):
                values, vectors = np.linalg.eigh(element)
                rows.append(np.sqrt(max(values[-1], 0.0)) * vectors[:, -1])
            v = np.array(rows).conj()
            parts.append(np.stack([v.real, v.imag]).reshape(-1))
    return np.concatenate(parts)


# columns: the x, y, u, v images as combinations of the x and y images
_SIGNAL_COEFFS = np.array([[1.0, 0.0, SQRT_HALF, SQRT_HALF], [0.0, 1.0, SQRT_HALF, -SQRT_HALF]])
# rows: the state Bob must not find for x, y, u, v
_WRONG = np.array([[0.0, 1.0], [1.0, 0.0], [SQRT_HALF, -SQRT_HALF], [SQRT_HALF, SQRT_HALF]])


def _signal_images(isometry: NDArray[np.complex128], probe_dim: int) -> NDArray[np.complex128]:
    """Images of x, y, u, v indexed [bob, probe, signal]."""
    return (isometry @ _SIGNAL_COEFFS).reshape(2, probe_dim, 4)


def _probe_states(images: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Eve's reduced states indexed [basis, bit, p, q]."""
    rho = np.einsum("bps,bqs->spq", images, images.conj())
    return rho.reshape(2, 2, *rho.shape[1:])


def _helstrom_readout(rho: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Eigenbasis of rho_0 - rho_1 per basis, rows holding the conjugated eigenvectors."""
    _, vectors = np.linalg.eigh(rho[:, 0] - rho[:, 1])
    return np.swapaxes(vectors, -1, -2).conj()


def evaluate(
    params: Sequence[float],
    probe_dim: int = 4,
    measurement: str = "projective",
    extra_outcomes: int = 0,
) -> Tuple[float, float]:
    """Basis-averaged (I, D) of the strategy encoded by ``params``."""
    x = np.asarray(params, dtype=np.float64)
    raw_iso, raw_meas = _split(x, probe_dim, measurement, extra_outcomes)
    images = _signal_images(_orthonormalize(raw_iso), probe_dim)
    rho = _probe_states(images)
    if measurement == "helstrom":
        readout = _helstrom_readout(rho)
    else:
        readout = np.stack([_orthonormalize(raw) for raw in raw_meas])
    # P[k, j, i] = <w_j| rho_ki |w_j>, with readout rows holding conj(w_j)
    lik = np.clip(np.einsum("kjp,kipq,kjq->kji", readout, rho, readout.conj()).real, 0.0, None)
    total = lik.sum(axis=2)
    g = np.divide(np.abs(lik[..., 0] - lik[..., 1]), total, out=np.zeros_like(total), where=total > 0.0)
    info = 0.25 * float(np.sum(0.5 * total * phi(np.minimum(g, 1.0))))
    wrong = np.einsum("sb,bps->sp", _WRONG, images)
    dist = 0.25 * float(np.sum(np.abs(wrong) ** 2))
    return info, dist


def _with_helstrom_readout(x: NDArray[np.float64], cfg: SearchConfig, rng: np.random.Generator) -> NDArray[np.float64]:
    """Extend interaction-only parameters with the Helstrom readout of that interaction."""
    raw_iso, _ = _split(x, cfg.probe_dim, "helstrom", 0)
    readout = _helstrom_readout(_probe_states(_signal_images(_orthonormalize(raw_iso), cfg.probe_dim)))
    parts = [x]
    for rows in readout:
        if cfg.extra_outcomes:
            shape = (cfg.extra_outcomes, cfg.probe_dim)
            noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            rows = np.vstack([rows, EXTRA_OUTCOME_SCALE * noise])
        parts.append(np.stack([rows.real, rows.imag]).reshape(-1))
    return np.concatenate(parts)


def _bound_any(d: float) -> float:
    """The information bound extended to d in [0, 1] by its symmetry about 1/2."""
    return 0.5 * phi(min(gain_bound(min(max(d, 0.0), 1.0)), 1.0))


class _Objective:
    """Penalized negative objective that counts evaluations and the worst bound violation."""

    def __init__(self, cfg: SearchConfig, weight: float) -> None:
        self.cfg = cfg
        self.weight = weight
        self.evaluations = 0
        self.violation = -np.inf

    def __call__(self, x: NDArray[np.float64]) -> float:
        self.evaluations += 1
        try:
            i, d = evaluate(x, self.cfg.probe_dim, self.cfg.measurement, self.cfg.extra_outcomes)
        except DegenerateParametersError:
            return DEGENERATE_OBJECTIVE
        self.violation = max(self.violation, i - _bound_any(d))
        return -(i - self.weight * (d - self.cfg.d_target) ** 2)


def _minimize(fun: _Objective, x0: NDArray[np.float64], method: str, max_iters: int, tolerance: float):
    if method == "powell":
        options = {"maxfev": max_iters, "xtol": tolerance, "ftol": tolerance}
    else:
        options = {"maxfev": max_iters, "xatol": tolerance, "fatol": tolerance, "adaptive": True}
    return minimize(fun, x0, method=METHODS[method], options=options)


def _starting_point(cfg: SearchConfig, rng: np.random.Generator) -> NDArray[np.float64]:
    n = param_count(cfg.probe_dim, cfg.measurement, cfg.extra_outcomes)
    for _ in range(MAX_RESAMPLES):
        x0 = rng.standard_normal(n)
        try:
            evaluate(x0, cfg.probe_dim, cfg.measurement, cfg.extra_outcomes)
            return x0
        except DegenerateParametersError:
            continue
    raise RuntimeError(f"No decodable starting point after {MAX_RESAMPLES} draws")


def run_restart(cfg: SearchConfig, index: int) -> RestartResult:
    """One seeded local search in up to three stages.

    A short warm-up and a polish at higher penalty move the interaction alone, with Eve
    reading out on the Helstrom basis. Unless ``cfg.measurement`` is "helstrom", a last
    stage then co-optimizes the interaction and the measurement, starting from that
    readout. Only the last stage decides ``converged``.
    """
    rng = rng_stream(cfg.seed, index)
    interaction = replace(cfg, measurement="helstrom", extra_outcomes=0)
    polish_weight = cfg.penalty_weight * POLISH_FACTOR

    warmup_fun = _Objective(interaction, cfg.penalty_weight)
    warmup = _minimize(warmup_fun, _starting_point(interaction, rng), cfg.method,
                       min(WARMUP_MAX_ITERS, cfg.max_iters), max(WARMUP_TOLERANCE, cfg.tolerance))
    final_fun = _Objective(interaction, polish_weight)
    final = _minimize(final_fun, warmup.x, cfg.method, cfg.max_iters, cfg.tolerance)
    stages = [warmup_fun, final_fun]
    if cfg.measurement != "helstrom":
        final_fun = _Objective(cfg, polish_weight)
        final = _minimize(final_fun, _with_helstrom_readout(np.asarray(final.x), cfg, rng),
                          cfg.method, cfg.max_iters, cfg.tolerance)
        stages.append(final_fun)

    x = np.asarray(final.x)
    i, d = evaluate(x, cfg.probe_dim, cfg.measurement, cfg.extra_outcomes)
    objective = i - polish_weight * (d - cfg.d_target) ** 2
    logger.info("restart %d: I=%.10f D=%.6f objective=%.10f (%s)", index, i, d, objective, final.message)
    return RestartResult(
        index=index,
        params=x,
        objective=float(objective),
        i_avg=i,
        d_avg=d,
        converged=bool(final.success),
        evaluations=sum(f.evaluations for f in stages),
        soundness_violation=float(max(f.violation for f in stages)),
    )


def _merge(results: List[RestartResult]) -> RestartResult:
    """Highest objective wins; ties go to the lower restart index."""
    return max(sorted(results, key=lambda r: r.index), key=lambda r: r.objective)


def search(cfg: SearchConfig) -> SearchResult:
    """Maximize I_avg - w (D_avg - d_target)^2 over interactions and measurements."""
    indices = list(range(cfg.restarts))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_restart, [cfg] * len(indices), indices))
    else:
        results = [run_restart(cfg, k) for k in indices]

    best = _merge(results)
    strategy = decode(best.params, cfg.probe_dim, cfg.measurement, cfg.extra_outcomes)
    i_achieved = average_information(strategy)
    d_achieved = 0.5 * (disturbance(strategy, Basis.XY) + disturbance(strategy, Basis.UV))
    gap = _bound_any(d_achieved) - i_achieved
    violation = max(r.soundness_violation for r in results)
    if violation > SOUNDNESS_SLACK:
        logger.warning("objective exceeded the information bound by %.3g during search", violation)
    logger.info("search d_target=%g: best restart %d, gap %.3g", cfg.d_target, best.index, gap)
    return SearchResult(
        config=cfg,
        best=strategy,
        params=best.params,
        i_achieved=i_achieved,
        d_achieved=d_achieved,
        gap_to_bound=gap,
        objective=best.objective,
        converged=best.converged,
        restart_objectives=tuple(r.objective for r in sorted(results, key=lambda r: r.index)),
        soundness_violation=violation,
        evaluations=sum(r.evaluations for r in results),
    )


def verify_saturation(
    d_grid: Sequence[float],
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    workers: int = 1,
) -> List[SaturationRow]:
    """Search at probe_dim 4 for each d and compare with the closed-form bound."""
    rows = []
    for d in d_grid:
        info_bound(d)  # range check
        result = search(SearchConfig(d_target=d, probe_dim=4, restarts=restarts, seed=seed, workers=workers))
        rows.append(SaturationRow(
            d=float(d),
            i_achieved=result.i_achieved,
            d_achieved=result.d_achieved,
            gap=result.gap_to_bound,
            passed=result.gap_to_bound <= TOL.optimization,
            converged=result.converged,
        ))
    return rows


def random_strategy(
    rng: np.random.Generator,
    probe_dim: int = 4,
    measurement: str = "projective",
    extra_outcomes: int = 0,
) -> Strategy:
    """Strategy decoded from standard-normal parameters (complex interaction, random readout)."""
    n = param_count(probe_dim, measurement, extra_outcomes)
    for _ in range(MAX_RESAMPLES):
        try:
            return decode(rng.standard_normal(n), probe_dim, measurement, extra_outcomes)
        except DegenerateParametersError:
            continue
    raise RuntimeError(f"No decodable strategy after {MAX_RESAMPLES} draws")
