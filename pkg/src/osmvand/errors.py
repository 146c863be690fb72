"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: usage errors -> 1, data errors -> 2,
compatibility errors -> 3.
"""


class OsmVandError(Exception):
    """Base class for all package errors."""


class DataError(OsmVandError):
    """Input data violates a contract (exit code 2)."""


class CompatibilityError(OsmVandError):
    """Artifacts from different configurations were mixed (exit code 3)."""


class MalformedXmlError(DataError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (line {position[0]}, column {position[1]})"
        super().__init__(message)
        self.position = position


class DuplicateChangesetIdError(DataError):
    pass


class NoVandalismFoundError(DataError):
    pass


class InsufficientNegativesError(DataError):
    pass


class EmptyTrainSetError(DataError):
    pass


class ShapeMismatchError(OsmVandError):
    pass


class EmptyKeySetError(OsmVandError):
    pass


class NonFiniteError(OsmVandError):
    pass


class NoForwardRecordedError(OsmVandError):
    pass


class DivergedLossError(OsmVandError):
    pass


class IdSetMismatchError(DataError):
    pass
