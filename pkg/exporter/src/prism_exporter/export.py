"""Feature extraction: frozen model, one pooled vector per sample.

The pipeline follows the model's own path for images (vision encoder,
projector, language stack) and pools the hidden states of one language
layer over the visual-token span only; instruction tokens condition the
states through attention but are never pooled. Defaults are layer 1 and
mean pooling. Layer indexing is 1-based counting transformer blocks
after the embedding layer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .datasets import Sample, open_dataset
from .errors import ConfigError
from .pfm import PfmInfo, verify_pfm, write_pfm
from .toy_model import N_VISUAL_TOKENS, ResolvedModel, encode_instruction, resolve_model

POOLING_MODES = ("mean", "last_token")


@dataclass(frozen=True)
class ExportConfig:
    model_id: str
    dataset_spec: str
    output_path: str
    layer_index: int = 1
    pooling: str = "mean"
    batch_size: int = 8
    max_samples: int | None = None

    def __post_init__(self) -> None:
        if self.pooling not in POOLING_MODES:
            raise ConfigError(f"pooling must be one of {POOLING_MODES}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_samples is not None and self.max_samples < 1:
            raise ConfigError("max_samples must be >= 1 when given")


@dataclass(frozen=True)
class ExportReport:
    output_path: str
    n_samples: int
    dim: int
    model_id: str
    layer_index: int
    pooling: str


def _batched(iterable, size):
    it = iter(iterable)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def _pool_visual_span(states: torch.Tensor, pooling: str) -> torch.Tensor:
    visual = states[:, :N_VISUAL_TOKENS, :]
    if pooling == "mean":
        return visual.mean(dim=1)
    return visual[:, -1, :]


def extract_batch(
    resolved: ResolvedModel, samples: list[Sample], layer_index: int, pooling: str
) -> np.ndarray:
    """Pooled float32 feature rows for one batch, in sample order."""
    images = torch.from_numpy(np.stack([s.image for s in samples]))
    tokens = torch.stack([encode_instruction(s.instruction) for s in samples])
    with torch.no_grad():
        states = resolved.model(images, tokens)[layer_index]
        pooled = _pool_visual_span(states, pooling)
    return pooled.to(torch.float32).numpy()


def extract_token_states(
    resolved: ResolvedModel, samples: list[Sample], layer_index: int
) -> np.ndarray:
    """Per-token visual-span states for a few samples (pooling oracle)."""
    if len(samples) > 8:
        raise ConfigError("token-state dumps are capped at 8 samples")
    images = torch.from_numpy(np.stack([s.image for s in samples]))
    tokens = torch.stack([encode_instruction(s.instruction) for s in samples])
    with torch.no_grad():
        states = resolved.model(images, tokens)[layer_index]
    return states[:, :N_VISUAL_TOKENS, :].to(torch.float32).numpy()


def export_features(config: ExportConfig) -> ExportReport:
    """Run the extraction pipeline and write PFM plus manifest.

    One row per dataset sample, in dataset order; fails on an empty
    dataset or a layer index outside the model depth.
    """
    resolved = resolve_model(config.model_id)
    if not 1 <= config.layer_index <= resolved.depth:
        raise ConfigError(
            f"layer_index {config.layer_index} outside model depth "
            f"[1, {resolved.depth}]"
        )
    samples_iter = open_dataset(config.dataset_spec)
    if config.max_samples is not None:
        samples_iter = itertools.islice(samples_iter, config.max_samples)

    rows: list[np.ndarray] = []
    ids: list[str] = []
    sources: list[str] = []
    for batch in _batched(samples_iter, config.batch_size):
        rows.append(extract_batch(resolved, batch, config.layer_index, config.pooling))
        ids.extend(s.sample_id for s in batch)
        sources.extend(s.source_tag for s in batch)
    if not rows:
        raise ConfigError(f"dataset {config.dataset_spec!r} yielded no samples")

    values = np.vstack(rows)
    write_pfm(config.output_path, values, ids, sources)
    return ExportReport(
        output_path=str(config.output_path),
        n_samples=values.shape[0],
        dim=values.shape[1],
        model_id=config.model_id,
        layer_index=config.layer_index,
        pooling=config.pooling,
    )


def verify_export(path: str | Path) -> PfmInfo:
    """Check header validity, NaN-freedom, and manifest consistency."""
    return verify_pfm(path)
