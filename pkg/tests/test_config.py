from numpy.testing import assert_array_equal
from pytest import raises

from bb84_probe.config import TOL, rng_stream
from bb84_probe.errors import RejectedInputError


def test_streams_reproducible():
    assert_array_equal(rng_stream(5, 2).random(8), rng_stream(5, 2).random(8))


def test_streams_independent():
    assert (rng_stream(5, 0).random(8) != rng_stream(5, 1).random(8)).all()


def test_negative_seed():
    with raises(RejectedInputError):
        rng_stream(-1, 0)


def test_tolerance_ordering():
    assert TOL.algebraic < TOL.spectral < TOL.completion < TOL.optimization
