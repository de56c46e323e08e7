"""Exception hierarchy shared across the pipeline.

Input-shaped problems (bad files, bad arguments) derive from
:class:`InputError`; violations of internal contracts derive from
:class:`InvariantError`. The CLI maps the two branches to distinct
exit codes.
"""


class SeeflowError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SeeflowError):
    """Problem with user-supplied files, directories or parameters."""


class InvariantError(SeeflowError):
    """An internal contract was violated (indicates a bug upstream)."""


# frame loading

class MissingFrame(InputError):
    def __init__(self, index: int, directory: str):
        self.index = index
        super().__init__(f"missing frame index {index} in {directory}")


class DimensionMismatch(InputError):
    def __init__(self, index: int, expected: tuple, got: tuple):
        self.index = index
        super().__init__(
            f"frame {index} has dimensions {got[0]}x{got[1]}, expected {expected[0]}x{expected[1]}"
        )


class DecodeError(InputError):
    pass


# sidecars

class SidecarFormatError(InputError):
    pass


class DuplicateEvent(InputError):
    def __init__(self, frame_a: int, frame_b: int):
        super().__init__(f"duplicate action event for frame pair ({frame_a}, {frame_b})")


class UnknownAction(InputError):
    def __init__(self, name: str):
        super().__init__(f"unknown action name {name!r}")


# geometry / extraction

class BoundsError(InputError):
    pass


class InvalidSpan(InputError):
    pass


class MissingLines(InputError):
    def __init__(self, frame_index: int):
        super().__init__(f"no extracted text lines for frame {frame_index}")


# evaluation

class NotOverlapping(InputError):
    pass


class InvalidFragmentList(InputError):
    pass


# synthesis

class ScriptError(InputError):
    def __init__(self, event_index: int, message: str):
        self.event_index = event_index
        super().__init__(f"event {event_index}: {message}")


class ParamError(InputError):
    pass
