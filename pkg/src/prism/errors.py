"""Exception taxonomy shared by every prism module.

Each class carries the CLI exit code the error maps to: 2 for anything
wrong with input data or files, 3 for violated call contracts.
"""

from __future__ import annotations


class PrismError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3


class FormatError(PrismError):
    """Malformed PFM header or wire-format violation."""

    exit_code = 2


class TruncationError(FormatError):
    """Payload shorter than the header-declared sample count requires."""


class DataError(PrismError):
    """Payload decodes but contains invalid values (NaN or Inf)."""

    exit_code = 2


class ManifestError(PrismError):
    """Missing, malformed, or inconsistent manifest sidecar."""

    exit_code = 2


class ContractError(PrismError):
    """A documented precondition or invariant was violated by the caller."""

    exit_code = 3


class DegenerateInputError(ContractError):
    """Operation received a vector it cannot meaningfully process
    (zero norm for cosine, zero centered variance for correlation)."""
