"""Exception types shared across the toolkit."""


class MslkitError(Exception):
    """Base class for all toolkit errors."""


class LabelError(MslkitError):
    """Base class for label-file problems; carries the 1-based line number."""

    def __init__(self, message: str, line: int, path=None):
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}line {line}: {message}")
        self.message = message
        self.line = line
        self.path = path

    def at_path(self, path) -> "LabelError":
        """Copy of this error attributed to a specific label file."""
        return type(self)(self.message, self.line, path)


class MalformedLineError(LabelError):
    """Label line is not 'class cx cy w h' with numeric tokens."""


class ClassOutOfRangeError(LabelError):
    """Label class id is negative or >= the declared class count."""


class CoordOutOfRangeError(LabelError):
    """Label coordinate falls outside [0, 1]."""


class ManifestError(MslkitError):
    """Base class for dataset-manifest problems."""


class MissingKeyError(ManifestError):
    def __init__(self, key: str):
        super().__init__(f"manifest is missing required key {key!r}")
        self.key = key


class CountMismatchError(ManifestError):
    def __init__(self, nc: int, n_names: int):
        super().__init__(f"manifest declares nc={nc} but lists {n_names} names")
        self.nc = nc
        self.n_names = n_names


class UnreadableError(ManifestError):
    """Manifest file cannot be read or parsed at all."""


class EmptyDirectoryError(MslkitError):
    """Frame ingestion found no image files."""


class EmptyInputError(MslkitError):
    """Dataset split received no items."""


class NotDivisibleError(MslkitError):
    """Input dimensions are not divisible by a required stride."""


class ShapeMismatchError(MslkitError):
    """A tensor does not have the shape its metadata promises."""


class BackendFailureError(MslkitError):
    """Model backend raised during inference; carries the frame index."""

    def __init__(self, message: str, frame_index: int):
        super().__init__(f"frame {frame_index}: {message}")
        self.frame_index = frame_index


class MalformedCsvError(MslkitError):
    """Training-log CSV has no usable header row."""


class NonNumericCellError(MslkitError):
    """Training-log CSV cell could not be parsed as a number."""

    def __init__(self, row: int, column: str):
        super().__init__(f"non-numeric value at row {row}, column {column!r}")
        self.row = row
        self.column = column


class IoFailureError(MslkitError):
    """Report emission could not write an output file."""
