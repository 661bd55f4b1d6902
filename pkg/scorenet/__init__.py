"""Dynamical chord networks built from symbolic scores."""
from ._version import __version__

__all__ = ['__version__']
