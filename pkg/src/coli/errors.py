"""Exception hierarchy shared across the package.

Every error raised on bad input or corrupt files derives from CoLiError so
the command line can distinguish "your data is wrong" (exit 1, with a
message naming the failing stage) from genuine bugs.
"""


class CoLiError(Exception):
    """Base class for all user-facing errors."""


class CorpusError(CoLiError):
    """Unusable corpus input: empty corpus, malformed dataset records."""


class BpeError(CoLiError):
    """Invalid BPE training input or a corrupt model file."""


class EmbeddingError(CoLiError):
    """Invalid embedding training input or a corrupt embedding file."""


class FeatureError(CoLiError):
    """Invalid feature template or vocabulary input."""


class ModelError(CoLiError):
    """Invalid training input, prediction input, or a corrupt model file."""
