"""Exception hierarchy.

Everything raised on purpose derives from :class:`DpcError`.  The CLI maps
:class:`ConfigError` subclasses to exit code 2 and :class:`TrainingError`
subclasses to exit code 3.
"""


class DpcError(Exception):
    pass


class ConfigError(DpcError):
    """Bad input data, bad flags, or a contract violated by the caller."""


class TrainingError(DpcError):
    """Numerical failure while fitting a model."""


class MissingColumn(ConfigError):
    pass


class NonNumericCell(ConfigError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric value {value!r} at row {row}, column {column!r}")


class EmptyFile(ConfigError):
    pass


class DuplicateSampleId(ConfigError):
    pass


class TooFewExperiments(ConfigError):
    pass


class TooFewValues(ConfigError):
    pass


class UnknownProperty(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class EmptyDataset(ConfigError):
    pass


class WrongBackboneKind(ConfigError):
    pass


class InvalidConfig(ConfigError):
    pass


class KTooLarge(ConfigError):
    pass


class NonFiniteLoss(TrainingError):
    pass
