"""Exception types shared across the package."""


class HocnError(Exception):
    """Base class for all package errors."""


class EdgeListParseError(HocnError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class SplitError(HocnError):
    """Edge split cannot be performed (graph too small, bad ratios)."""


class SamplingError(HocnError):
    """Negative sampling exhausted the available non-edges."""


class ScaleError(HocnError):
    """Exact all-pairs computation requested on a graph above the size guard."""


class ConfigError(HocnError):
    """Invalid configuration value (unknown basis, order out of range, ...)."""


class InputError(HocnError):
    """Shape or dimension mismatch in user-supplied data."""


class MetricError(HocnError):
    """Metric preconditions violated (too few negatives, empty positives)."""


class EvaluationError(HocnError):
    """A score came back non-finite during evaluation."""


class TrainingError(HocnError):
    """Training diverged; carries the last finite parameter state."""

    def __init__(self, message, last_state=None):
        self.last_state = last_state
        super().__init__(message)


class BoundDomainError(HocnError):
    """Closed-form bound evaluated outside its mathematical domain."""
