"""Exception hierarchy shared by all degradelab modules."""


class DegradeLabError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class ConfigError(DegradeLabError):
    pass


class DisconnectedTopology(DegradeLabError):
    pass


class DuplicateId(DegradeLabError):
    pass


class NoRoute(DegradeLabError):
    pass


class InvalidCount(DegradeLabError):
    pass


class InsufficientResources(DegradeLabError):
    """No ECU/slot combination satisfies an application's demands."""

    def __init__(self, message, app_id=None):
        super().__init__(message)
        self.app_id = app_id


class NoCandidate(DegradeLabError):
    pass


class Insufficient(DegradeLabError):
    """Slot pool smaller than the requested count."""


class LaneConflict(DegradeLabError):
    pass


class NoReservation(DegradeLabError):
    pass


class MissingVariable(DegradeLabError):
    pass


class OutOfRange(DegradeLabError):
    pass


class UnmappedInstance(DegradeLabError):
    pass


class NonIntegrable(DegradeLabError):
    pass


class EmptyClass(DegradeLabError):
    pass


class UndefinedBaseline(DegradeLabError):
    pass
