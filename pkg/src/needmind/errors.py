"""Exception types shared across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """A parameter, hierarchy or scenario value is structurally invalid."""


class ScenarioError(ConfigurationError):
    """A scenario source failed validation.

    Carries the offending key and, when known, the 1-based source line.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class KnowledgeFormatError(ValueError):
    """A saved knowledge base could not be parsed."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")
