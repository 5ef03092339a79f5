from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prism.feature_store import (
    DatasetHandle,
    FeatureMatrix,
    ManifestEntry,
    SampleManifest,
)


def make_handle(values, sources=None) -> DatasetHandle:
    """Wrap an array in a handle with generated ids."""
    values = np.asarray(values)
    n = values.shape[0]
    if sources is None:
        sources = ["test"] * n
    manifest = SampleManifest(
        tuple(ManifestEntry(f"s{i:06d}", sources[i]) for i in range(n))
    )
    return DatasetHandle(FeatureMatrix(values), manifest)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
