"""Exception hierarchy shared by every sumforge module."""


class SumforgeError(Exception):
    """Base class for all errors raised by sumforge."""


class BadRatios(SumforgeError, ValueError):
    pass


class EmptyDocument(SumforgeError, ValueError):
    pass


class EmptyReference(SumforgeError, ValueError):
    pass


class BadN(SumforgeError, ValueError):
    pass


class ShapeMismatch(SumforgeError, ValueError):
    pass


class OutOfVocab(SumforgeError, IndexError):
    pass


class SentenceTooLong(SumforgeError, ValueError):
    pass


class NonFiniteLoss(SumforgeError, FloatingPointError):
    pass


class EmptyTrainingSet(SumforgeError, ValueError):
    pass


class DivergedLoss(SumforgeError, FloatingPointError):
    """Training produced a non-finite loss.

    ``last_good`` holds the parameters from before the offending update.
    """

    def __init__(self, message, last_good=None, epoch=None):
        super().__init__(message)
        self.last_good = last_good
        self.epoch = epoch


class EmptyTestSet(SumforgeError, ValueError):
    pass


class CheckpointMismatch(SumforgeError, ValueError):
    pass


class LabelingError(SumforgeError):
    """A single document failed during batch oracle labeling."""

    def __init__(self, doc_id, cause):
        super().__init__(f"document {doc_id!r}: {cause}")
        self.doc_id = doc_id
        self.cause = cause
