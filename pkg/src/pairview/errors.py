"""Exception types shared across the package."""


class PairviewError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(PairviewError):
    """Operand shapes do not conform to an operation's signature."""


class ContractError(PairviewError):
    """A caller violated a documented precondition."""


class FormatError(PairviewError):
    """A file is malformed (bad magic, truncation, corrupt header)."""


class SchemaError(PairviewError):
    """Structured data disagrees with its declared schema."""


class UnsupportedError(PairviewError):
    """Input uses a codec or encoding the reader does not handle."""


class MissingViewError(PairviewError):
    """A manifest record references a view file that does not exist."""


class EmptyClassError(PairviewError):
    """A label class required for sampling has no records."""


class EmptyDatasetError(PairviewError):
    """A filter left no records."""


class InputTooShort(PairviewError):
    """An audio input is shorter than the minimum an extractor needs."""


class DegenerateInputError(PairviewError):
    """Numerically degenerate input (e.g. zero variance) for an analysis."""
