"""
Exception hierarchy for landscape analysis.

Two families:
    InputError: the caller handed in something invalid (CLI exit code 2).
    AnalysisError: an internal consistency check failed (CLI exit code 1).
"""

from typing import Any, Optional


class MetastableError(Exception):
    """Base class for every error raised by the package."""


class InputError(MetastableError, ValueError):
    """Invalid input: landscape, state set, parameter or file."""


class EmptyInput(InputError):
    pass


class SelfLoop(InputError):
    pass


class InvalidEdge(InputError):
    pass


class DisconnectedGraph(InputError):
    pass


class LandscapeFormatError(InputError):
    """Malformed landscape file. Message carries line/column or JSON path."""


class EmptySet(InputError):
    pass


class FullSet(InputError):
    pass


class Overlap(InputError):
    pass


class GroundMismatch(InputError):
    pass


class SingleGround(InputError):
    """Fewer than two ground states / stable plateaux: no hierarchy to build."""


class CapExcludesSource(InputError):
    pass


class NotConnected(InputError):
    pass


class NotACycle(InputError):
    pass


class CapExceeded(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class WrongParticleCount(InputError):
    pass


class InvalidParams(InputError):
    pass


class TerminalReached(InputError):
    """Attempt to advance past a level with a single recurrent class."""


class AnalysisError(MetastableError, RuntimeError):
    """An invariant of the construction failed; indicates a bug."""


class UnreachableTarget(AnalysisError):
    pass


class SingularSystem(AnalysisError):
    pass


class InvariantViolation(AnalysisError):
    pass


class ClassificationViolation(AnalysisError):
    """
    A level failed the recurrent/transient classification checks.

    Args:
        message: Human-readable description
        level: Level index h
        plateau: Index of the offending plateau within the level (None if global)
        check: Name of the failed check
        diagnostics: Full diagnostics object for the level
    """

    def __init__(
        self,
        message: str,
        level: int,
        plateau: Optional[int],
        check: str,
        diagnostics: Any = None,
    ):
        super().__init__(message)
        self.level = level
        self.plateau = plateau
        self.check = check
        self.diagnostics = diagnostics
