"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class ModelError(Exception):
    """Base for all toolkit errors raised as exceptions (not diagnostics)."""


class NotFoundError(ModelError):
    """A referenced element, class, or property does not exist."""


class WrongKindError(ModelError):
    """An operation was applied to an element of the wrong kind."""


class CollisionError(ModelError):
    """A rename would collide with an existing name."""


class StateError(ModelError):
    """Persistent compile state is unusable."""
