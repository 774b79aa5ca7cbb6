"""Exact enumeration, lace expansion and Monte Carlo tools for prudent walks."""

from ._version import CODE_VERSION

__version__ = CODE_VERSION
