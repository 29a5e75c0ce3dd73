from __future__ import annotations


class MatmapError(Exception):
    """Base class for errors raised by this package."""


class DomainError(MatmapError, ValueError):
    """An argument lies outside the domain of an operation."""


class RegistryError(MatmapError, ValueError):
    """Bad material/class registration or lookup."""


class RotationError(MatmapError, ValueError):
    """A matrix is not a proper rotation."""


class ScenarioError(MatmapError, ValueError):
    """A scenario document or detection log failed validation.

    ``key`` is a dotted path such as ``units[0].pulses[1].end_s`` and
    ``line`` the 1-based line of the document it refers to, when known.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.message = message
        self.key = key
        self.line = line
        where = []
        if key:
            where.append(key)
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")
