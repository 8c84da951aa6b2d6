"""Exception hierarchy shared by every gatecast module."""


class GatecastError(Exception):
    """Base class for all gatecast errors."""


class ConfigurationError(GatecastError, ValueError):
    """Invalid parameters, protocol/size mismatch or malformed input."""


class ListFileError(ConfigurationError):
    """A list file failed to parse or validate.

    ``line`` is the 1-based line number of the offending line, when known.
    """

    def __init__(self, message, line=None, detail=None):
        self.line = line
        self.detail = detail
        if line is not None:
            message = f"{message}, line {line}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class EnumerationBudgetError(GatecastError):
    """Exhaustive enumeration would exceed the configured budget."""


class RunawayError(GatecastError, RuntimeError):
    """A broadcast run exceeded its hard round cap."""


class LemmaRegimeWarning(UserWarning):
    """Parameters fall outside the asymptotic regime the marking bound assumes."""
