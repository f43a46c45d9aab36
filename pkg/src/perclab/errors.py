"""Exception types shared across the package."""

from __future__ import annotations


class UsageError(ValueError):
    """A caller violated an operation's precondition (CLI exit code 2)."""


class ResourceError(RuntimeError):
    """A request exceeds a configured resource guard (CLI exit code 3)."""
