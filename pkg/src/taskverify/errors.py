"""Exception hierarchy. Everything derives from ``TaskVerifyError`` so callers
(the CLI in particular) can catch one type."""


class TaskVerifyError(Exception):
    pass


class ValidationError(TaskVerifyError, ValueError):
    pass


# dsl
class UnknownQueryType(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class InvalidVocabulary(ValidationError):
    pass


class DotSyntaxError(ValidationError):
    pass


class CycleDetected(ValidationError):
    pass


class DanglingEdge(ValidationError):
    pass


# semparse
class NoTemplateMatch(ValidationError):
    pass


class UnknownObject(ValidationError):
    pass


class SizeLimitExceeded(ValidationError):
    pass


# aligner
class EmptyTrace(ValidationError):
    pass


class TooFewSegments(ValidationError):
    pass


# scorer / training
class MissingAnnotations(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnknownVocabulary(ValidationError):
    pass


class NonFiniteLoss(TaskVerifyError, ArithmeticError):
    pass


class EmptyDataset(ValidationError):
    pass


class CheckpointMismatch(ValidationError):
    pass


# datagen
class IncompatibleActionObject(ValidationError):
    pass


class CannotFalsify(TaskVerifyError):
    pass


class InfeasibleSplit(ValidationError):
    pass
