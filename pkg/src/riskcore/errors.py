"""Exception hierarchy.

Everything raised on purpose by the package derives from ``RiskcoreError``.
The CLI maps ``ConfigError`` to exit code 2 and ``DataError`` to exit code 3.
"""


class RiskcoreError(Exception):
    pass


class ConfigError(RiskcoreError):
    pass


class DataError(RiskcoreError):
    pass


class InvalidConfig(ConfigError):
    pass


class ShapeMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class DegenerateSplit(DataError):
    pass


class MissingClass(DataError):
    pass


class TooFewSamples(DataError):
    pass


class EmptyBatch(DataError):
    pass


class InvalidK(ConfigError):
    pass


class InvalidFraction(ConfigError):
    pass


class LengthMismatch(DataError):
    pass


class NonBinary(DataError):
    pass


class DegenerateSamples(DataError):
    pass


class MissingSuspectedColumn(DataError):
    pass


class MissingArtifacts(DataError):
    pass
