"""Data-collaboration games between a signal authority and mobility data providers."""

__version__ = "0.1.0"
