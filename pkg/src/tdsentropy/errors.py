"""Exception hierarchy shared by the whole package."""


class TdsError(Exception):
    """Base class for all tdsentropy errors."""


class DomainError(TdsError, ValueError):
    """An argument lies outside the domain of an operation."""


class NoDataError(TdsError, ValueError):
    """No observation is available where one is required."""


class NotFoundError(TdsError, KeyError):
    """A requested sample or key does not exist."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class IngestError(TdsError, ValueError):
    """Input could not be parsed or failed validation.

    ``issues`` holds every finding, each carrying the offending line when known.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("\n".join(str(issue) for issue in self.issues))
