"""Exception types shared across the engine."""


class WeicomError(Exception):
    """Base class for all engine errors."""


class ZeroVector(WeicomError):
    """A vector with (near-)zero Euclidean norm cannot be normalized."""


class FormatError(WeicomError):
    """A file does not conform to its declared format."""


class CountMismatch(WeicomError):
    """Row counts of paired files disagree."""


class DuplicateId(WeicomError):
    """An identifier or text key appears more than once."""


class UnknownImage(WeicomError):
    """An image id is not present in the corpus."""


class UnknownText(WeicomError):
    """A text string is not present in the corpus text table."""


class DimMismatch(WeicomError):
    """Embedding dimensions disagree."""


class TooFewCandidates(WeicomError):
    """Score normalization needs at least two eligible candidates."""


class LengthMismatch(WeicomError):
    """Two score vectors are not aligned (length or exclusion set)."""


class LambdaOutOfRange(WeicomError):
    """The modality control weight must lie in [0, 1]."""


class EmptyValueGroup(WeicomError):
    """A declared attribute value matches no corpus image."""


class SingleValueAttribute(WeicomError):
    """An attribute needs at least two values per class to build queries."""


class NoPositives(WeicomError):
    """Average precision is undefined for an empty positive set."""
