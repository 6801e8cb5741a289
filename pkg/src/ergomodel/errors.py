"""Exception hierarchy.

Each class carries an exit code so the command line can map failures
without inspecting messages.
"""


class ErgomodelError(Exception):
    exit_code = 2


class InputError(ErgomodelError, ValueError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class ResourceError(ErgomodelError):
    """A length cap or search horizon was exceeded."""

    exit_code = 3

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class StabilizationError(ResourceError):
    """A limit did not settle within the horizon.

    ``details`` holds the last two observations (factor sets or ratio
    trajectory) so callers can see what was still moving.
    """


class StructuralError(ErgomodelError):
    """An invariant that should hold by construction failed."""

    exit_code = 1


class NotKStandardError(StructuralError):
    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level
