"""Training-free data selection toolkit.

Diagnoses representation anisotropy in embedding sets, scores sample
redundancy through implicitly re-centered correlation in O(Nd), prunes
to a percentile budget, verifies the underlying geometry on synthetic
worlds, and accounts for end-to-end selection cost.
"""

from .baselines import (
    SelectorSpec,
    cosine_redundancy_scores,
    cosine_redundancy_select,
    farthest_point_select,
    random_select,
)
from .diagnostics import (
    AnisotropyReport,
    MeanStats,
    SpectrumReport,
    anisotropy_report,
    drift_ratio,
    format_mean_stats_table,
    mean_statistics,
    singular_spectrum,
)
from .errors import (
    ContractError,
    DataError,
    DegenerateInputError,
    FormatError,
    ManifestError,
    PrismError,
    TruncationError,
)
from .feature_store import (
    FORMAT_VERSION,
    DatasetHandle,
    FeatureMatrix,
    ManifestEntry,
    SampleManifest,
    read_features,
    write_features,
)
from .geometry import (
    CenteredUnitVector,
    DriftCosineApprox,
    DriftDecomposition,
    center_normalize,
    cosine,
    decompose,
    drift_cosine_approx,
    pearson,
)
from .osc import OscRecord, OscResult, compare_records, osc
from .redundancy import (
    RedundancyScores,
    SelectionResult,
    per_source_counts,
    redundancy_scores,
    select,
    selection_budget,
    tau_sweep,
)
from .synthlab import (
    PRESETS,
    SelectionEval,
    SelectorSummary,
    SynthConfig,
    SynthDataset,
    SynthTruth,
    Theorem1Report,
    compare_selectors,
    evaluate_selection,
    generate,
    get_preset,
    verify_theorem1,
)

__version__ = "0.1.0"

__all__ = [
    "AnisotropyReport",
    "CenteredUnitVector",
    "ContractError",
    "DataError",
    "DatasetHandle",
    "DegenerateInputError",
    "DriftCosineApprox",
    "DriftDecomposition",
    "FORMAT_VERSION",
    "FeatureMatrix",
    "FormatError",
    "ManifestEntry",
    "ManifestError",
    "MeanStats",
    "OscRecord",
    "OscResult",
    "PRESETS",
    "PrismError",
    "RedundancyScores",
    "SampleManifest",
    "SelectionEval",
    "SelectionResult",
    "SelectorSpec",
    "SelectorSummary",
    "SpectrumReport",
    "SynthConfig",
    "SynthDataset",
    "SynthTruth",
    "Theorem1Report",
    "TruncationError",
    "anisotropy_report",
    "center_normalize",
    "compare_records",
    "compare_selectors",
    "cosine",
    "cosine_redundancy_scores",
    "cosine_redundancy_select",
    "decompose",
    "drift_cosine_approx",
    "drift_ratio",
    "evaluate_selection",
    "farthest_point_select",
    "format_mean_stats_table",
    "generate",
    "get_preset",
    "mean_statistics",
    "osc",
    "pearson",
    "per_source_counts",
    "random_select",
    "read_features",
    "redundancy_scores",
    "select",
    "selection_budget",
    "singular_spectrum",
    "tau_sweep",
    "verify_theorem1",
    "write_features",
]
