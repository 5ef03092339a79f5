"""Pooled hidden-state extraction from frozen multimodal models.

Writes PFM feature files (plus manifest sidecars) consumable by the
prism selection toolkit.
"""

from .datasets import Sample, open_dataset
from .errors import ConfigError, ExportError, FormatError, ManifestError
from .export import (
    ExportConfig,
    ExportReport,
    export_features,
    extract_batch,
    extract_token_states,
    verify_export,
)
from .pfm import PfmInfo, verify_pfm, write_pfm
from .toy_model import MODEL_BUILDERS, ToyMultimodalModel, resolve_model

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExportConfig",
    "ExportError",
    "ExportReport",
    "FormatError",
    "ManifestError",
    "MODEL_BUILDERS",
    "PfmInfo",
    "Sample",
    "ToyMultimodalModel",
    "export_features",
    "extract_batch",
    "extract_token_states",
    "open_dataset",
    "resolve_model",
    "verify_export",
    "verify_pfm",
    "write_pfm",
]
