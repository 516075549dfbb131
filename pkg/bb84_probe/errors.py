"""Exception types raised by the library."""

from __future__ import annotations


class RejectedInputError(ValueError):
    """An argument is outside the domain of the operation it was passed to."""


class DegenerateParametersError(RejectedInputError):
    """Raw optimizer parameters decode to near-dependent vectors; draw new ones."""
