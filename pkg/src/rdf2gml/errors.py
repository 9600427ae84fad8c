"""Exception types shared across the pipeline."""


class Rdf2GmlError(Exception):
    """Base class for all errors raised by this package."""


class IoError(Rdf2GmlError):
    pass


class RdfSyntaxError(Rdf2GmlError):
    """Malformed RDF statement. Carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormat(Rdf2GmlError):
    pass


class ConfigParseError(Rdf2GmlError):
    pass


class ValidationError(Rdf2GmlError):
    """Aggregated configuration validation failures."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))


class EmptyGraph(Rdf2GmlError):
    pass


class DivergenceError(Rdf2GmlError):
    pass


class EncoderFailure(Rdf2GmlError):
    pass


class ShapeMismatch(Rdf2GmlError):
    pass


class UnboundSelect(Rdf2GmlError):
    pass


class DisconnectedPattern(Rdf2GmlError):
    pass


class MissingManifest(Rdf2GmlError):
    pass
