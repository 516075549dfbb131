"""Shared fixtures."""

from __future__ import annotations

from pytest import fixture

from bb84_probe.config import rng_stream
from bb84_probe.probe import build_optimal

SATURATION_POINTS = (0.01, 0.05, 0.1, 0.146447, 0.25, 0.4)


@fixture
def rng():
    return rng_stream(1234, 0)


@fixture(params=SATURATION_POINTS)
def d(request):
    return request.param


@fixture
def optimal_01():
    return build_optimal(0.1, 0.1)
