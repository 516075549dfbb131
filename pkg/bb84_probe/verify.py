"""Verification suites run by ``bb84-probe verify``."""

from __future__ import annotations

import logging
from itertools import combinations
from typing import Callable, Dict, List, NamedTuple

import numpy as np

from .analysis import THRESHOLD_CLOSED_FORM, chsh_formula, chsh_from_state, threshold
from .bases import Basis, polar_rotation
from .bounds import LN2, concavity_check, info_bound, small_d_slope_check
from .config import TOL, rng_stream
from .errors import RejectedInputError
from .measurement import equality_conditions, mutual_information, optimal_povm, outcome_stats
from .optimizer import random_strategy
from .probe import build_optimal, verify_constraints
from .symmetry import damneq_check, symmetrize

logger = logging.getLogger(__name__)

SATURATION_POINTS = (0.01, 0.05, 0.1, 0.146447, 0.25, 0.4)
ASYMMETRIC_GRID = tuple(np.linspace(0.0, 0.4, 6))
EXPECTED_SIGNS = (1, 1, -1, -1)
CHSH_GRID = tuple(np.linspace(0.0, 0.5, 51))
THRESHOLD_AGREEMENT = 1e-8
SYMMETRY_SEED = 2024


class Check(NamedTuple):
    suite: str
    name: str
    passed: bool
    detail: str


def _information(d_xy: float, d_uv: float, b: Basis) -> float:
    p = build_optimal(d_xy, d_uv)
    return mutual_information(outcome_stats(p, b, optimal_povm(p, b)))


def bounds_suite() -> List[Check]:
    checks = []
    report = concavity_check(1e-3)
    checks.append(Check("bounds", "concavity", report.passed,
                        f"max second difference {report.max_second_difference:.3g}"))
    slope = small_d_slope_check()
    checks.append(Check("bounds", "small_d_slope", slope.passed,
                        "ratios " + ", ".join(f"{r:.6f}" for r in slope.ratios)))
    top = info_bound(0.5)
    checks.append(Check("bounds", "maximum_ln2", abs(top - LN2) < TOL.algebraic, f"I(1/2) = {top:.15f}"))

    roots = threshold()
    spread = max(abs(a - b) for a, b in combinations(roots, 2))
    checks.append(Check("bounds", "threshold_agreement", spread < THRESHOLD_AGREEMENT,
                        f"closed {roots.closed_form:.10f} bisection {roots.bisection:.10f} chsh {roots.chsh_root:.10f}"))
    checks.append(Check("bounds", "threshold_value", round(THRESHOLD_CLOSED_FORM, 6) == 0.146447,
                        f"{THRESHOLD_CLOSED_FORM:.8f}"))

    for d in SATURATION_POINTS:
        err = abs(_information(d, d, Basis.XY) - info_bound(d))
        checks.append(Check("bounds", f"saturation[{d}]", err < 1e-10, f"|I - bound| = {err:.3g}"))

    worst = 0.0
    for d_xy in ASYMMETRIC_GRID:
        for d_uv in ASYMMETRIC_GRID:
            worst = max(
                worst,
                abs(_information(d_xy, d_uv, Basis.XY) - info_bound(d_uv)),
                abs(_information(d_xy, d_uv, Basis.UV) - info_bound(d_xy)),
            )
    checks.append(Check("bounds", "asymmetric_saturation", worst < 1e-10, f"max error {worst:.3g}"))

    chsh_error = max(abs(chsh_from_state(d) - chsh_formula(d)) for d in CHSH_GRID)
    checks.append(Check("bounds", "chsh_grid", chsh_error < 1e-10, f"max error {chsh_error:.3g}"))
    return checks


def equality_suite() -> List[Check]:
    checks = []
    for d_xy, d_uv in ((0.1, 0.1), (0.2, 0.1), (0.05, 0.3)):
        p = build_optimal(d_xy, d_uv)
        constraints = verify_constraints(p)
        checks.append(Check("equality", f"constraints[{d_xy},{d_uv}]", constraints.passed,
                            "failed: " + ", ".join(constraints.failures()) if not constraints.passed else "all residuals below tolerance"))
        for b in Basis:
            signs = equality_conditions(p, optimal_povm(p, b), b)
            ok = signs.eps == EXPECTED_SIGNS and signs.attained
            checks.append(Check("equality", f"signs[{d_xy},{d_uv},{b.value}]", ok,
                                f"eps = {signs.eps}, max residual {float(np.max(signs.residuals)):.3g}"))
    return checks


def symmetry_suite() -> List[Check]:
    checks = []
    base = build_optimal(0.1, 0.2).strategy()
    d, residual = damneq_check(symmetrize(base))
    checks.append(Check("symmetry", "isotropic_after_mixing", residual < TOL.spectral,
                        f"D = {d:.10f}, residual {residual:.3g}"))
    checks.append(Check("symmetry", "disturbance_averaged", abs(d - 0.15) <= TOL.algebraic, f"D = {d:.12f}"))

    turn = polar_rotation(np.pi / 2)
    full = np.linalg.matrix_power(turn, 4)
    checks.append(Check("symmetry", "four_quarter_turns", bool(np.allclose(full, -np.eye(2), atol=TOL.algebraic)),
                        "R(90)^4 = -1"))

    rng = rng_stream(SYMMETRY_SEED, 0)
    for k in range(3):
        d, residual = damneq_check(symmetrize(random_strategy(rng)))
        checks.append(Check("symmetry", f"random_isotropy[{k}]", residual < TOL.spectral,
                            f"D = {d:.6f}, residual {residual:.3g}"))
    return checks


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "bounds": bounds_suite,
    "equality": equality_suite,
    "symmetry": symmetry_suite,
}


def run_suite(name: str) -> List[Check]:
    """Run one suite, or every suite for ``"all"``."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise RejectedInputError(f"Unknown suite '{name}'. Choose from: {', '.join([*SUITES, 'all'])}")
    checks = []
    for n in names:
        logger.info("running %s checks", n)
        checks.extend(SUITES[n]())
    return checks
