from __future__ import annotations


class ExportError(Exception):
    """Base class for exporter failures."""


class ConfigError(ExportError):
    """Invalid export configuration (model id, layer, pooling, dataset)."""


class FormatError(ExportError):
    """A written or inspected PFM file violates the wire format."""


class ManifestError(ExportError):
    """Manifest sidecar missing or inconsistent with the binary."""
