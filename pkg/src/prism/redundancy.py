"""Redundancy scoring and percentile-budget selection.

A sample's redundancy score is its mean re-centered correlation with
every other sample. Written pairwise that is O(N^2 d); because every
correlation is a dot product of centered unit vectors u_i, the sum
collapses to ``(u_i . S - 1) / (N - 1)`` with ``S = sum_j u_j``, which is
algebraically identical and runs in O(Nd). Tests retain the pairwise
form as an oracle.

Degenerate (zero-variance) samples carry no internal variation to
correlate: they receive score +1.0 (maximally redundant, pruned first)
and are excluded from S so they cannot spread NaN into other scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._parallel import map_row_blocks
from .errors import ContractError, ManifestError
from .feature_store import DatasetHandle, SampleManifest
from .geometry import centered_unit_rows, unit_rows


@dataclass(frozen=True)
class RedundancyScores:
    """Per-sample scores in [-1, 1]; degenerate samples pinned at +1.0."""

    scores: np.ndarray
    degenerate_ids: frozenset[int]


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of pruning to a percentile budget.

    ``selected_ids`` is ordered by original sample index. For score-based
    selectors ``threshold_value`` is the k-th smallest score; selectors
    without scores report NaN there.
    """

    selected_ids: tuple[str, ...]
    tau_percent: float
    threshold_value: float
    selector_name: str
    seed: int | None = None


def selection_budget(n: int, tau: float) -> int:
    """Exact-count budget: max(1, floor(tau * n / 100)).

    Uses rational arithmetic so the floor matches the true product even
    when the float expression would round across an integer boundary.
    """
    if not 0.0 < tau <= 100.0:
        raise ContractError(f"tau={tau} out of range, need 0 < tau <= 100")
    if n < 1:
        raise ContractError("need at least one sample")
    k = int(Fraction(tau) * n / 100)
    return max(1, k)


def _mean_similarity_scores(
    values: np.ndarray, center: bool, threads: int | None
) -> tuple[np.ndarray, np.ndarray]:
    """Scores ``(u_i . S - 1) / (N - 1)`` for centered or raw unit rows.

    Two deterministic passes over fixed row blocks: accumulate S in block
    order, then the per-row dot products. Returns (scores, degenerate
    mask); with ``center=False`` the mask is all False because zero-norm
    rows reject instead.
    """
    n, d = values.shape
    if n < 2:
        raise ContractError("redundancy scores need at least two samples")

    def rows_of(a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        if center:
            return centered_unit_rows(values[a:b])
        block = unit_rows(values[a:b])
        return block, np.zeros(block.shape[0], dtype=bool)

    def block_sum(a: int, b: int) -> np.ndarray:
        u, _ = rows_of(a, b)
        return u.sum(axis=0)

    partials = map_row_blocks(n, block_sum, threads)
    s = np.zeros(d, dtype=np.float64)
    for p in partials:
        s += p

    def block_scores(a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
        u, degen = rows_of(a, b)
        return (u @ s - 1.0) / (n - 1), degen

    scores = np.empty(n, dtype=np.float64)
    degenerate = np.zeros(n, dtype=bool)
    results = map_row_blocks(n, block_scores, threads)
    offset = 0
    for block_score, block_degen in results:
        stop = offset + block_score.shape[0]
        scores[offset:stop] = block_score
        degenerate[offset:stop] = block_degen
        offset = stop
    np.clip(scores, -1.0, 1.0, out=scores)
    scores[degenerate] = 1.0
    return scores, degenerate


def redundancy_scores(handle: DatasetHandle, threads: int | None = None) -> RedundancyScores:
    """Mean re-centered correlation of each sample with the rest of the set."""
    scores, degenerate = _mean_similarity_scores(
        handle.matrix.values, center=True, threads=threads
    )
    return RedundancyScores(
        scores=scores, degenerate_ids=frozenset(int(i) for i in np.flatnonzero(degenerate))
    )


def select_lowest(
    scores: np.ndarray,
    manifest: SampleManifest,
    tau: float,
    selector_name: str,
    seed: int | None = None,
) -> SelectionResult:
    """Keep the k lowest-scoring samples, ties broken by ascending index."""
    n = scores.shape[0]
    if len(manifest) != n:
        raise ContractError(f"{len(manifest)} manifest entries for {n} scores")
    k = selection_budget(n, tau)
    order = np.argsort(scores, kind="stable")
    chosen = np.sort(order[:k])
    ids = manifest.ids()
    return SelectionResult(
        selected_ids=tuple(ids[i] for i in chosen),
        tau_percent=float(tau),
        threshold_value=float(scores[order[k - 1]]),
        selector_name=selector_name,
        seed=seed,
    )


def select(scores: RedundancyScores, manifest: SampleManifest, tau: float) -> SelectionResult:
    """Percentile-budget selection of the least redundant samples."""
    return select_lowest(scores.scores, manifest, tau, selector_name="prism")


def per_source_counts(result: SelectionResult, manifest: SampleManifest) -> dict[str, int]:
    """How many selected samples come from each manifest source tag."""
    by_id = manifest.id_to_source()
    counts: dict[str, int] = {}
    for sid in result.selected_ids:
        if sid not in by_id:
            raise ManifestError(f"selected id {sid!r} not present in manifest")
        source = by_id[sid]
        counts[source] = counts.get(source, 0) + 1
    return counts


def tau_sweep(
    handle: DatasetHandle, taus, threads: int | None = None
) -> list[SelectionResult]:
    """Selections for several budgets reusing one score computation."""
    taus = list(taus)
    if not taus:
        raise ContractError("tau sweep needs at least one tau")
    for tau in taus:
        if not 0.0 < tau <= 100.0:
            raise ContractError(f"tau={tau} out of range, need 0 < tau <= 100")
    scores = redundancy_scores(handle, threads=threads)
    return [select(scores, handle.manifest, tau) for tau in taus]


def scores_to_csv_rows(scores: RedundancyScores, manifest: SampleManifest):
    """Yield (sample_id, score, degenerate 0/1) rows in sample order."""
    for i, entry in enumerate(manifest.entries):
        yield entry.sample_id, float(scores.scores[i]), int(i in scores.degenerate_ids)
