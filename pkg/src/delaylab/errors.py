"""Error taxonomy shared by the library, the CLI, and the HTTP service.

Every raised error carries a stable machine-readable ``code`` drawn from the
closed set below.  The service maps exception *types* to HTTP statuses
(InvalidInput -> 400, NumericFailure -> 422, CapExceeded -> 413) and forwards
the code verbatim, so library code should pick codes from this registry rather
than inventing new strings at call sites.
"""

from __future__ import annotations

ERROR_CODES = frozenset(
    {
        "validation_error",
        "invalid_quasipolynomial",
        "non_finite_input",
        "derivative_order_too_large",
        "normalization_overflow",
        "degenerate_placement_system",
        "roots_not_distinct",
        "root_count_mismatch",
        "neutral_chain_unbounded",
        "no_admissible_point",
        "window_boundary_root",
        "certification_failed",
        "multiplicity_too_low",
        "factorization_unrepresentable",
        "kummer_argument_too_large",
        "kummer_series_diverged",
        "invalid_window",
        "invalid_grid",
        "invalid_step",
        "invalid_history",
        "neutral_unsupported",
        "signal_too_short",
        "unknown_example",
        "unknown_block_type",
        "report_schema_mismatch",
        "cap_exceeded",
    }
)


class DelayLabError(Exception):
    """Base class: an error with a stable code and a human-readable message."""

    def __init__(self, code: str, message: str):
        if code not in ERROR_CODES:
            raise ValueError(f"unregistered error code: {code!r}")
        super().__init__(message)
        self.code = code
        self.message = message


class InvalidInput(DelayLabError):
    """The request itself is malformed (shapes, ranges, non-finite values)."""


class NumericFailure(DelayLabError):
    """The input was well-formed but the computation could not produce a
    trustworthy result (degenerate system, failed certification, overflow)."""


class CapExceeded(DelayLabError):
    """A configured resource cap was exceeded (service returns 413)."""
