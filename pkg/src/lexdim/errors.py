"""Exception types shared across the package.

Each error carries a short ``code`` string; the HTTP service maps these
codes into its JSON error envelope.
"""


class LexdimError(Exception):
    """Base class for every error raised by this package."""

    code = "Error"


class FileUnreadableError(LexdimError):
    code = "FileUnreadable"


class FileUnwritableError(LexdimError):
    code = "FileUnwritable"


class EmptyFileError(LexdimError):
    code = "EmptyFile"


class DimensionMismatchError(LexdimError):
    code = "DimensionMismatch"


class AlreadyNormalizedError(LexdimError):
    code = "AlreadyNormalized"


class VersionMismatchError(LexdimError):
    code = "VersionMismatch"


class CorruptCacheError(LexdimError):
    code = "CorruptCache"


class CorruptFileError(LexdimError):
    code = "CorruptFile"


class EmptyClassError(LexdimError):
    code = "EmptyClass"


class UnknownWordError(LexdimError):
    """A word is not present in the vocabulary; ``word`` names it."""

    code = "UnknownWord"

    def __init__(self, word: str):
        super().__init__(f"unknown word: {word!r}")
        self.word = word


class EmptySeedsError(LexdimError):
    code = "EmptySeeds"


class VocabularyExhaustedError(LexdimError):
    code = "VocabularyExhausted"


class OverlappingLabelsError(LexdimError):
    code = "OverlappingLabels"


class NotTrainedError(LexdimError):
    code = "NotTrained"


class InsufficientLabelsError(LexdimError):
    code = "InsufficientLabels"


class InsufficientPairsError(LexdimError):
    code = "InsufficientPairs"


class DegenerateLexiconError(LexdimError):
    code = "DegenerateLexicon"


class EmptyDocumentError(LexdimError):
    code = "EmptyDocument"


class MixedDimensionalityError(LexdimError):
    code = "MixedDimensionality"


class InsufficientClassesError(LexdimError):
    code = "InsufficientClasses"
