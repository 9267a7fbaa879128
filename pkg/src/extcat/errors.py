"""Exception hierarchy shared across the package.

Every loud failure mode gets its own class so callers (and the CLI exit-code
contract) can tell configuration problems, validation problems, missing
morphism data and internal consistency violations apart.
"""


class ExtcatError(Exception):
    """Base class for all package errors."""


class WindowOverflow(ExtcatError):
    """An operation produced an object outside the declared window."""

    def __init__(self, obj, window_label=""):
        self.obj = obj
        self.window_label = window_label
        super().__init__(f"object {obj} leaves window {window_label!r}")


class EnumerationCapExceeded(ExtcatError):
    """Too many extension classes to enumerate for one (C, A) pair."""


class NoExtension(ExtcatError):
    """Universal extension requested for a pair with ext dimension 0."""


class UnknownIndec(ExtcatError):
    """A name or id does not belong to the model."""


class AnnotationMissing(ExtcatError):
    """A morphism-level query cannot be served from the available data."""


class ConsistencyError(ExtcatError):
    """Model data contradicts a structural theorem; release blocking."""


class NonIntegralSolution(ExtcatError):
    """The multiplicity system D*m = c has no nonnegative integer solution."""


class SingularMatrix(ExtcatError):
    """The multiplicity matrix D is not invertible."""


class ParseError(ExtcatError):
    """Interchange file is not syntactically valid."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(ExtcatError):
    """Interchange file parses but violates the documented schema."""


class ValidationError(ExtcatError):
    """A loaded model failed structural validation."""

    def __init__(self, report):
        self.report = report
        super().__init__("model validation failed:\n" + str(report))


class NonTermination(ExtcatError):
    """An iterative closure failed to stabilise within its iteration cap."""
