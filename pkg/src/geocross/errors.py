"""Exception types shared across the package."""


class GeoCrossError(Exception):
    """Base class for all domain errors."""


class RecordParseError(GeoCrossError):
    """A raw input line could not be parsed into a record."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class EmptyDataError(GeoCrossError):
    """An operation that needs data received none."""


class UnknownNodeError(GeoCrossError):
    """A node id is absent from the graph or embedding table."""


class OutOfVocabularyError(GeoCrossError):
    """A queried word is not in the vocabulary."""


class UntrainedNodeError(GeoCrossError):
    """A resolved node has no embedding."""


class DegenerateVectorError(GeoCrossError):
    """A query vector has zero norm, so cosine similarity is undefined."""


class ModelRequiredError(GeoCrossError):
    """The query needs a cluster model that was not supplied."""


class ArtifactFormatError(GeoCrossError):
    """An artifact file failed version or format validation."""
