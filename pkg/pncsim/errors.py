from __future__ import annotations


class PncError(Exception):
    """Base class for every error raised by pncsim."""


class AlphabetMismatchError(PncError, ValueError):
    """Elements of different alphabets were combined."""


class DomainError(PncError, ValueError):
    """An operation was applied outside the set where it is defined."""


class ConstructionError(PncError):
    """A code could not be built (or loaded) with the requested structure."""


class ConfigError(PncError):
    """A simulation configuration is invalid or self-contradictory."""
