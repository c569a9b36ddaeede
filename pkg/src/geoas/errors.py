"""Exception types shared across the package."""


class GeoasError(Exception):
    """Base class for all geoas errors."""


class ParameterError(GeoasError):
    """An argument or configuration value violates a precondition."""


class FormatError(GeoasError):
    """A file does not conform to its documented format."""

    def __init__(self, message, *, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class ConsistencyError(GeoasError):
    """Two inputs that must agree (graph, embedding, border graph) do not."""


class NoPathError(GeoasError):
    """No path exists between the requested endpoints."""
