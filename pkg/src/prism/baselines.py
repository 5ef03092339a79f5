"""Baseline selectors operating in the raw (non-re-centered) space.

These exist as comparison targets: random sampling, greedy farthest-point
sampling, and mean raw-cosine redundancy. The last two judge diversity by
geometric dissimilarity of the raw embeddings, which a strong shared mean
component renders nearly uninformative; the synth lab measures exactly
that failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .feature_store import DatasetHandle
from .geometry import unit_rows
from .redundancy import (
    SelectionResult,
    _mean_similarity_scores,
    select_lowest,
    selection_budget,
)

FPS_METRICS = ("cosine", "euclidean")
SELECTOR_NAMES = ("random", "fps", "cosine_redundancy", "prism")


def random_select(handle: DatasetHandle, tau: float, seed: int) -> SelectionResult:
    """Uniform sample without replacement; reproducible for a fixed seed."""
    if seed is None:
        raise ContractError("random selector requires a seed")
    n = handle.n_samples
    k = selection_budget(n, tau)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(n, size=k, replace=False))
    ids = handle.manifest.ids()
    return SelectionResult(
        selected_ids=tuple(ids[i] for i in chosen),
        tau_percent=float(tau),
        threshold_value=float("nan"),
        selector_name="random",
        seed=int(seed),
    )


def farthest_point_select(
    handle: DatasetHandle,
    tau: float,
    metric: str = "euclidean",
    seed: int = 0,
) -> SelectionResult:
    """Greedy max-min selection from a seed-chosen start point.

    Exact greedy with a running minimum-distance array; each iteration
    adds the point farthest from the current selection.
    """
    if metric not in FPS_METRICS:
        raise ContractError(f"unknown fps metric {metric!r}, use one of {FPS_METRICS}")
    n = handle.n_samples
    if n < 2:
        raise ContractError("farthest-point sampling needs at least two samples")
    k = selection_budget(n, tau)
    values = handle.matrix.values.astype(np.float64)
    if metric == "cosine":
        units = unit_rows(values)

        def dist_to(idx: int) -> np.ndarray:
            return 1.0 - units @ units[idx]

    else:

        def dist_to(idx: int) -> np.ndarray:
            diff = values - values[idx]
            return np.einsum("ij,ij->i", diff, diff)

    rng = np.random.default_rng(seed)
    start = int(rng.integers(n))
    chosen = [start]
    min_dist = dist_to(start)
    min_dist[start] = -np.inf
    for _ in range(k - 1):
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        np.minimum(min_dist, dist_to(nxt), out=min_dist)
        min_dist[nxt] = -np.inf
    ids = handle.manifest.ids()
    return SelectionResult(
        selected_ids=tuple(ids[i] for i in sorted(chosen)),
        tau_percent=float(tau),
        threshold_value=float("nan"),
        selector_name="fps",
        seed=int(seed),
    )


def cosine_redundancy_select(
    handle: DatasetHandle, tau: float, threads: int | None = None
) -> SelectionResult:
    """Select by lowest mean raw cosine with the rest of the set.

    Same linear-time trick as the re-centered scores but on raw unit
    vectors, so the shared mean component stays in. Zero-norm rows have
    no direction and are rejected.
    """
    values = handle.matrix.values
    if handle.n_samples < 2:
        raise ContractError("cosine redundancy needs at least two samples")
    scores, _ = _mean_similarity_scores(values, center=False, threads=threads)
    return select_lowest(scores, handle.manifest, tau, selector_name="cosine_redundancy")


def cosine_redundancy_scores(handle: DatasetHandle, threads: int | None = None) -> np.ndarray:
    """Mean raw cosine of each sample against the rest (for analysis)."""
    scores, _ = _mean_similarity_scores(handle.matrix.values, center=False, threads=threads)
    return scores


@dataclass(frozen=True)
class SelectorSpec:
    """Named selector plus the parameters it needs.

    ``seed`` is mandatory for the random selector; fps falls back to seed
    0 when none is given. ``params`` may carry ``metric`` for fps.
    """

    name: str
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in SELECTOR_NAMES:
            raise ContractError(
                f"unknown selector {self.name!r}, use one of {SELECTOR_NAMES}"
            )
        if self.name == "random" and self.seed is None:
            raise ContractError("random selector requires a seed")
        metric = self.params.get("metric")
        if metric is not None and metric not in FPS_METRICS:
            raise ContractError(f"fps metric must be one of {FPS_METRICS}")

    def run(
        self, handle: DatasetHandle, tau: float, threads: int | None = None
    ) -> SelectionResult:
        if self.name == "random":
            return random_select(handle, tau, seed=self.seed)
        if self.name == "fps":
            return farthest_point_select(
                handle,
                tau,
                metric=self.params.get("metric", "euclidean"),
                seed=self.seed if self.seed is not None else 0,
            )
        if self.name == "cosine_redundancy":
            return cosine_redundancy_select(handle, tau, threads=threads)
        from .redundancy import redundancy_scores, select

        return select(redundancy_scores(handle, threads=threads), handle.manifest, tau)
