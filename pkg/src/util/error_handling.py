"""Tracking errors and the per-run ledger of degraded updates.

Numerical failures inside the filter, loss and gradient code raise the
exceptions below. The simulation never aborts on them: the engine
catches each one, records it in an ``ErrorHandler`` and carries on with
the update skipped.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional


class TrackingError(ValueError):
    """Base class for numerical failures in the tracking pipeline."""


class DegenerateGeometry(TrackingError):
    """Agent and target positions coincide (zero range)."""


class GimbalSingularity(DegenerateGeometry):
    """Target lies on the agent's vertical axis; angle derivatives blow up."""


class SingularInnovation(TrackingError):
    """Innovation covariance is too ill-conditioned to invert."""


class SingularCovariance(TrackingError):
    """Error covariance cannot be inverted into a Fisher information matrix."""


class NonPositiveDefiniteInformation(TrackingError):
    """A Fisher information matrix has no real log-determinant."""


@dataclass
class ErrorEntry:
    """Minimal error entry with structured data."""
    error_type: str
    source: str
    details: Optional[str] = None


# Severity is intrinsic to the error type
INFO_TYPES = {"missed_detection", "singular_geometry"}
WARNING_TYPES = {"singular_innovation", "singular_covariance", "nonfinite_gradient"}


def describe_source(agent: int, target: Optional[int], step: int) -> str:
    """Format the ``source`` field of an entry."""
    if target is None:
        return f"agent {agent} / step {step}"
    return f"agent {agent} / target {target} / step {step}"


class ErrorHandler:
    """Collects degraded-update events for one replication."""

    def __init__(self, keep_entries: bool = False):
        """Initialize the ledger.

        Args:
            keep_entries: Store every entry, not just the counts. Off by
                default; a 4000-step run can produce many thousands.
        """
        self.keep_entries = keep_entries
        self.info_entries: List[ErrorEntry] = []
        self.warnings: List[ErrorEntry] = []
        self._counts: Dict[str, int] = {}

    def _record(self, bucket: List[ErrorEntry], entry: ErrorEntry) -> ErrorEntry:
        self._counts[entry.error_type] = self._counts.get(entry.error_type, 0) + 1
        if self.keep_entries:
            bucket.append(entry)
        return entry

    def handle_missed_detection(self, agent: int, target: int, step: int,
                                details: str) -> ErrorEntry:
        """A detection produced no usable measurement."""
        entry = ErrorEntry("missed_detection", describe_source(agent, target, step), details)
        return self._record(self.info_entries, entry)

    def handle_singular_geometry(self, agent: int, target: int, step: int,
                                 details: str) -> ErrorEntry:
        """A measurement was dropped because the geometry is singular."""
        entry = ErrorEntry("singular_geometry", describe_source(agent, target, step), details)
        return self._record(self.info_entries, entry)

    def handle_singular_innovation(self, agent: int, target: int, step: int,
                                   details: str) -> ErrorEntry:
        """A filter update was skipped because S could not be inverted."""
        entry = ErrorEntry("singular_innovation", describe_source(agent, target, step), details)
        return self._record(self.warnings, entry)

    def handle_singular_covariance(self, agent: int, target: int, step: int,
                                   details: str) -> ErrorEntry:
        """A track's covariance could not be turned into information."""
        entry = ErrorEntry("singular_covariance", describe_source(agent, target, step), details)
        return self._record(self.warnings, entry)

    def handle_nonfinite_gradient(self, agent: int, step: int, details: str) -> ErrorEntry:
        """A loss gradient came out NaN/inf and was replaced by zero."""
        entry = ErrorEntry("nonfinite_gradient", describe_source(agent, None, step), details)
        return self._record(self.warnings, entry)

    def count(self, error_type: str) -> int:
        """Number of events of one type recorded so far."""
        return self._counts.get(error_type, 0)

    def get_processing_summary(self) -> Dict[str, Any]:
        """Get a summary of all degraded updates."""
        info = sum(n for t, n in self._counts.items() if t in INFO_TYPES)
        warnings = sum(n for t, n in self._counts.items() if t in WARNING_TYPES)
        return {
            "info_count": info,
            "warning_count": warnings,
            "by_type": dict(sorted(self._counts.items())),
        }

    def merge_counts(self, counts: Dict[str, int]) -> None:
        """Fold event counts from another ledger (e.g. a summary's ``by_type``) into this one."""
        for error_type, n in counts.items():
            self._counts[error_type] = self._counts.get(error_type, 0) + n
