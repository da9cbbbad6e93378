"""Exception taxonomy shared across the package."""

from __future__ import annotations


class GchshError(Exception):
    """Base class for package-specific failures."""


class InfeasibleScoreError(GchshError):
    """Requested score exceeds what any quantum state can reach at the given test."""


class SweepIncompleteError(GchshError):
    """A score sweep ended before the inflection point could be located."""


class TableError(GchshError):
    """Base class for bound-table persistence problems."""


class TableVersionError(TableError):
    """Stored table was written by an incompatible format version."""


class TableIncompleteError(TableError):
    """A scan theta has no stored bound curve."""
