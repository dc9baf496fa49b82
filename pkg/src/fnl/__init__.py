"""Certifying full nonlocality of bipartite pure states via antidistinguishability."""

__version__ = "0.1.0"
