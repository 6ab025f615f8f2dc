"""Shared exception hierarchy.

Every domain error raised by the package derives from ``TutorWebError`` so
the service layer can map them onto HTTP status codes in one place.
"""


class TutorWebError(Exception):
    """Base class for all domain errors."""


# --- content tree ---------------------------------------------------------

class UnknownNodeError(TutorWebError):
    pass


class UnknownParentError(UnknownNodeError):
    pass


class InvalidKindPairingError(TutorWebError):
    pass


class KindMismatchError(TutorWebError):
    pass


# --- item bank ------------------------------------------------------------

class UnknownLectureError(TutorWebError):
    pass


class UnknownQuestionError(TutorWebError):
    pass


class UnknownTemplateError(TutorWebError):
    pass


class NoCorrectAnswerError(TutorWebError):
    pass


class MultipleCorrectAnswersError(TutorWebError):
    pass


class ExpressionError(TutorWebError):
    pass


class AnswerWithoutAllocationError(TutorWebError):
    pass


# --- allocation engine ----------------------------------------------------

class EmptyLectureError(TutorWebError):
    pass


class InvalidBucketError(TutorWebError):
    pass


class QuestionNotInLectureError(TutorWebError):
    pass


class NoPriorAllocationError(TutorWebError):
    pass


# --- anova ----------------------------------------------------------------

class EmptyDataError(TutorWebError):
    pass


class DimensionMismatchError(TutorWebError):
    pass


class InvalidDfError(TutorWebError):
    pass


class NotEstimableError(TutorWebError):
    pass


# --- trial simulation -----------------------------------------------------

class TooFewStudentsError(TutorWebError):
    pass


# --- event log ------------------------------------------------------------

class OrderingViolationError(TutorWebError):
    pass


class StorageFailureError(TutorWebError):
    pass


class CorruptLogError(TutorWebError):
    """Raised when replay hits an invalid entry; carries the offending seq."""

    def __init__(self, seq: int, reason: str):
        super().__init__(f"corrupt log at seq {seq}: {reason}")
        self.seq = seq
        self.reason = reason
