"""Exception hierarchy shared across the toolkit."""


class EvalkitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(EvalkitError, ValueError):
    """A parameter violates its documented domain (sigma <= 0, alpha < 1, ...)."""


class DimensionError(EvalkitError, ValueError):
    """Image shapes are incompatible with the requested operation."""


class FormatError(EvalkitError, ValueError):
    """A file is not in a supported format."""


class DegenerateInputError(EvalkitError, ValueError):
    """Input carries no usable signal (e.g. all-zero samples for a GGD fit)."""


class InsufficientDataError(EvalkitError, ValueError):
    """Too few samples/images/patches to produce a well-defined result."""


class EmbeddingLookupError(EvalkitError, KeyError):
    """An image id is missing from the embedding manifest."""


class ManifestError(EvalkitError, ValueError):
    """A dataset manifest is malformed or references missing data."""
