"""Exception types shared across the package."""

from __future__ import annotations


class TasksetsError(Exception):
    """Base class for all errors raised by this package."""


class DataError(TasksetsError):
    """Input data is unusable (CLI exit code 2)."""


class ConfigError(TasksetsError):
    """Configuration or usage problem (CLI exit code 1)."""


class MalformedRecord(DataError):
    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class UnknownPlayer(DataError):
    pass


class TickOutOfRange(DataError):
    pass


class UnknownTaskSet(DataError):
    pass


class NoAffordances(DataError):
    """A task-set group was never simultaneously afforded, so no curve exists."""


class InsufficientGames(DataError):
    def __init__(self, player: str, have: int, need: int) -> None:
        super().__init__(f"player {player!r} has {have} games, needs {need}")
        self.player = player
        self.have = have
        self.need = need


class TooFewPlayers(DataError):
    pass


class ZeroVarianceAllColumns(DataError):
    pass


class EmptyCollection(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class InvalidConfig(ConfigError):
    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class IoError(DataError):
    """An input path is missing, unreadable, or holds no trajectories."""
