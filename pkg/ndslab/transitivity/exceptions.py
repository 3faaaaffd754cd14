from __future__ import annotations

from typing import Iterable, Tuple, Type


class DynamicsError(Exception):
    """Base class for every failure raised by the transitivity services."""


class UsageError(DynamicsError, ValueError):
    pass


class DomainError(DynamicsError, ValueError):
    pass


class ConfigurationError(DynamicsError, ValueError):
    pass


class UnsupportedOperation(DynamicsError, TypeError):
    pass


class ConstructionError(DynamicsError, ValueError):
    pass


class PreconditionError(DynamicsError, ValueError):
    pass


def guard(checks: Iterable[Tuple[Type[DynamicsError], str, bool]]) -> None:
    """Raise the first failing check, in declaration order."""
    for error_class, message_text, condition in checks:
        if condition:
            raise error_class(message_text)
