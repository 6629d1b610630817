"""Exception taxonomy for the pipeline.

Every stage raises subclasses of :class:`CdoError` so the CLI can map any
data problem to a single exit code.
"""


class CdoError(Exception):
    """Base class for all pipeline errors."""


# track file parsing
class MissingColumn(CdoError):
    pass


class MalformedRow(CdoError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class EmptyFile(CdoError):
    pass


# terminal-area clipping / sector assignment
class TooFewPoints(CdoError):
    pass


class UnsupportedSector(CdoError):
    pass


# feature extraction
class ZeroLengthSegment(CdoError):
    pass


class EmptySegments(CdoError):
    pass


class OutOfRange(CdoError):
    pass


class IncompleteRow(CdoError):
    def __init__(self, flight_id: str, missing: list[str]):
        super().__init__(f"flight {flight_id}: missing fields {', '.join(missing)}")
        self.flight_id = flight_id
        self.missing = missing


# model training / evaluation
class UnknownLabel(CdoError):
    pass


class ClassTooSmall(CdoError):
    pass


class NonFiniteGradient(CdoError):
    pass


class FeatureCountMismatch(CdoError):
    pass


class LengthMismatch(CdoError):
    pass


class EmptyInput(CdoError):
    pass


# attribution / separability
class SchemaMismatch(CdoError):
    pass


class MissingCover(CdoError):
    pass


class EmptyFolds(CdoError):
    pass


class UnknownFeature(CdoError):
    pass


class EmptySample(CdoError):
    pass


class SingleClassData(CdoError):
    pass


# fuzzy classifier
class NonFiniteValue(CdoError):
    pass


class EmptyTraining(CdoError):
    pass


class EmptyRuleBase(CdoError):
    pass


class RuleParseError(CdoError):
    pass


# synthetic data generation
class InfeasibleSpec(CdoError):
    pass
