"""Optimal individual-signal eavesdropping on BB84: probes, bounds, search and simulation."""

__version__ = "1.0.0"
