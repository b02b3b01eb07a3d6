"""Exception taxonomy shared across the simulator.

Each class maps to one CLI exit code so failures stay distinguishable
in scripted runs: input/parse errors -> 1, configuration errors -> 2,
internal guards -> 3.
"""


class CramSimError(Exception):
    """Base class for all simulator errors."""

    exit_code = 1


class InputError(CramSimError):
    """Malformed or out-of-range input data (files, events, frames)."""

    exit_code = 1


class FrameFormatError(InputError):
    """Unparseable frame/event payload; carries the failing byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class EventRangeError(InputError):
    """An event's coordinates fall outside the target frame."""

    def __init__(self, index: int, detail: str):
        super().__init__(f"event {index}: {detail}")
        self.index = index


class ConfigError(CramSimError):
    """A knob is outside its documented range or a config file is invalid."""

    exit_code = 2


class GuardError(CramSimError):
    """An internal safety guard tripped (e.g. a probe that never settles)."""

    exit_code = 3
