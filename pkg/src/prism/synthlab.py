"""Synthetic anisotropic embedding worlds with known ground truth.

Each sample is drift + cluster center + isotropic noise. The drift lies
along the normalized all-ones direction, i.e. it is exactly the kind of
global location shift that per-vector mean removal nullifies, while the
cluster centers are drawn from a seeded random orthonormal basis of the
subspace orthogonal to the drift. That construction keeps inter-cluster
correlations near zero after re-centering and lets the collapse of raw
cosine similarity be dialed in via a single drift-ratio knob.

Ground truth (cluster membership, planted duplicates, realized drift
ratio) rides along so selector quality is measurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .baselines import SelectorSpec
from .diagnostics import drift_ratio as measure_drift_ratio
from .errors import ContractError, ManifestError
from .feature_store import DatasetHandle, FeatureMatrix, ManifestEntry, SampleManifest
from .geometry import centered_unit_rows
from .redundancy import SelectionResult


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs.

    ``drift_ratio_target`` is the desired ||mu|| / E||delta|| of the
    emitted matrix (0 disables drift). ``cluster_weights`` optionally
    skews cluster populations; ``duplicate_group_size`` controls how many
    exact copies each duplicated template receives, modelling the bursty
    way redundancy shows up in scraped corpora.
    """

    n_samples: int
    dim: int
    n_clusters: int
    drift_ratio_target: float
    cluster_spread: float
    residual_sigma: float
    duplicate_fraction: float
    seed: int
    cluster_weights: tuple[float, ...] | None = None
    duplicate_group_size: int = 25

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ContractError("n_samples must be >= 1")
        if self.dim < 2:
            raise ContractError("dim must be >= 2")
        if not 1 <= self.n_clusters <= self.n_samples:
            raise ContractError("need 1 <= n_clusters <= n_samples")
        if self.dim < self.n_clusters + 1:
            raise ContractError("dim must be >= n_clusters + 1 for orthogonal centers")
        if self.drift_ratio_target < 0:
            raise ContractError("drift_ratio_target must be >= 0")
        if self.cluster_spread <= 0:
            raise ContractError("cluster_spread must be > 0")
        if self.residual_sigma <= 0:
            raise ContractError("residual_sigma must be > 0")
        if not 0.0 <= self.duplicate_fraction < 1.0:
            raise ContractError("duplicate_fraction must be in [0, 1)")
        if self.cluster_weights is not None:
            if len(self.cluster_weights) != self.n_clusters:
                raise ContractError("cluster_weights length must equal n_clusters")
            if any(w <= 0 for w in self.cluster_weights):
                raise ContractError("cluster_weights must be positive")
        if self.duplicate_group_size < 2:
            raise ContractError("duplicate_group_size must be >= 2")


@dataclass(frozen=True)
class SynthTruth:
    """Ground truth for a generated dataset."""

    cluster_of: np.ndarray
    duplicates_of: dict[int, int]
    realized_drift_ratio: float
    n_clusters: int
    sample_ids: tuple[str, ...]

    def id_to_index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.sample_ids)}


@dataclass(frozen=True)
class SynthDataset:
    handle: DatasetHandle
    truth: SynthTruth


@dataclass(frozen=True)
class Theorem1Report:
    """Drift-collapse measurements over random sample pairs."""

    mean_raw_cosine: float
    mean_centered_pearson_intercluster: float
    mean_approx_error: float


@dataclass(frozen=True)
class SelectionEval:
    cluster_coverage: float
    min_cluster_share: float
    duplicate_prune_rate: float

    def as_dict(self) -> dict:
        return {
            "cluster_coverage": self.cluster_coverage,
            "min_cluster_share": self.min_cluster_share,
            "duplicate_prune_rate": self.duplicate_prune_rate,
        }


METRIC_NAMES = ("cluster_coverage", "min_cluster_share", "duplicate_prune_rate")


@dataclass(frozen=True)
class SelectorSummary:
    """Per-selector mean and sample stddev of every metric across seeds."""

    selector: str
    n_seeds: int
    means: dict = field(default_factory=dict)
    stds: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "selector": self.selector,
            "n_seeds": self.n_seeds,
            "metrics": {
                name: {"mean": self.means[name], "std": self.stds[name]}
                for name in METRIC_NAMES
            },
        }


def _apportion(total: int, weights: Sequence[float]) -> np.ndarray:
    """Largest-remainder apportionment of ``total`` over ``weights``."""
    w = np.asarray(weights, dtype=np.float64)
    shares = w / w.sum() * total
    counts = np.floor(shares).astype(np.int64)
    remainder = total - int(counts.sum())
    if remainder > 0:
        order = np.argsort(-(shares - counts), kind="stable")
        counts[order[:remainder]] += 1
    return counts


def _cluster_centers(dim: int, n_clusters: int, spread: float, rng) -> np.ndarray:
    """Orthonormal centers, all orthogonal to the all-ones drift direction."""
    if n_clusters == 1:
        # A single cluster is just the isotropic blob around the drift.
        return np.zeros((1, dim), dtype=np.float64)
    drift_dir = np.ones(dim, dtype=np.float64) / math.sqrt(dim)
    basis = np.column_stack([drift_dir, rng.standard_normal((dim, n_clusters))])
    q, _ = np.linalg.qr(basis)
    return q[:, 1 : n_clusters + 1].T * spread


def generate(config: SynthConfig) -> SynthDataset:
    """Build a dataset and its truth; identical configs give identical bytes."""
    rng = np.random.default_rng(config.seed)
    n, d, k = config.n_samples, config.dim, config.n_clusters
    n_dup = int(config.duplicate_fraction * n)
    n_base = n - n_dup

    counts = _apportion(
        n_base,
        config.cluster_weights if config.cluster_weights is not None else [1.0] * k,
    )
    if n_dup > 0:
        n_templates = math.ceil(n_dup / config.duplicate_group_size)
        if n_templates > n_base:
            raise ContractError(
                "duplicate_fraction and duplicate_group_size need more templates "
                f"({n_templates}) than base samples ({n_base})"
            )

    labels_base = rng.permutation(np.repeat(np.arange(k), counts))
    centers = _cluster_centers(d, k, config.cluster_spread, rng)
    residual_field = centers[labels_base] + rng.standard_normal((n_base, d)) * (
        config.residual_sigma
    )

    duplicates_of: dict[int, int] = {}
    if n_dup > 0:
        templates = rng.choice(n_base, size=n_templates, replace=False)
        dup_sources = np.repeat(templates, config.duplicate_group_size)[:n_dup]
        residual_field = np.vstack([residual_field, residual_field[dup_sources]])
        labels = np.concatenate([labels_base, labels_base[dup_sources]])
        duplicates_of = {n_base + j: int(src) for j, src in enumerate(dup_sources)}
    else:
        labels = labels_base

    drift_scale = _calibrate_drift(residual_field, config.drift_ratio_target, d)
    # Drift along ones/sqrt(d) is a constant offset of drift_scale/sqrt(d)
    # added to every element; duplicates stay exact copies.
    values = (residual_field + drift_scale / math.sqrt(d)).astype(np.float32)

    ids = tuple(f"s{i:06d}" for i in range(n))
    manifest = SampleManifest(
        tuple(
            ManifestEntry(ids[i], f"cluster-{int(labels[i])}") for i in range(n)
        )
    )
    handle = DatasetHandle(FeatureMatrix(values), manifest)
    truth = SynthTruth(
        cluster_of=labels.astype(np.int64),
        duplicates_of=duplicates_of,
        realized_drift_ratio=float(measure_drift_ratio(values)),
        n_clusters=k,
        sample_ids=ids,
    )
    return SynthDataset(handle=handle, truth=truth)


def _calibrate_drift(residual_field: np.ndarray, target: float, dim: int) -> float:
    """Drift magnitude s so the emitted matrix hits the target ratio.

    The empirical mean of the final matrix is s*ones/sqrt(d) plus the mean
    of the residual field, so s solves ||s*dir + mean_field|| = target *
    mean residual norm exactly (clamped at zero when unreachable).
    """
    if target == 0.0:
        return 0.0
    mean_field = residual_field.mean(axis=0, dtype=np.float64)
    deltas = residual_field - mean_field
    mean_norm = float(np.linalg.norm(deltas, axis=1).mean())
    if mean_norm == 0.0:
        return 0.0
    drift_dir = np.ones(dim, dtype=np.float64) / math.sqrt(dim)
    along = float(mean_field @ drift_dir)
    perp_sq = float(mean_field @ mean_field) - along * along
    radicand = (target * mean_norm) ** 2 - perp_sq
    if radicand <= 0.0:
        return 0.0
    return max(0.0, math.sqrt(radicand) - along)


def _random_pairs(rng, n: int, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n, size=n_pairs)
    clash = i == j
    while np.any(clash):
        j[clash] = rng.integers(0, n, size=int(clash.sum()))
        clash = i == j
    return i, j


def verify_theorem1(config: SynthConfig, n_pairs: int = 2000) -> Theorem1Report:
    """Measure drift collapse and the quality of its second-order model.

    Over random pairs: mean raw cosine (collapses toward 1 as the drift
    ratio grows), mean re-centered correlation restricted to pairs from
    different clusters (stays near 0), and the mean absolute error of the
    second-order cosine approximation.
    """
    if n_pairs < 100:
        raise ContractError("need n_pairs >= 100")
    if config.n_clusters < 2:
        raise ContractError("theorem verification needs at least two clusters")
    ds = generate(config)
    values = ds.handle.matrix.values.astype(np.float64)
    labels = ds.truth.cluster_of
    n, d = values.shape
    rng = np.random.default_rng([config.seed, 0x7431])

    i, j = _random_pairs(rng, n, n_pairs)
    norms = np.linalg.norm(values, axis=1)
    raw_cos = np.einsum("ij,ij->i", values[i], values[j]) / (norms[i] * norms[j])
    mean_raw = float(raw_cos.mean())

    mu = values.mean(axis=0)
    deltas = values - mu
    mu_norm_sq = float(mu @ mu)
    approx_err = np.abs(raw_cos - _approx_cosines(deltas, mu, mu_norm_sq, i, j))
    mean_err = float(approx_err.mean())

    units, _ = centered_unit_rows(values)
    ii, jj = _intercluster_pairs(rng, labels, n_pairs)
    pearson_inter = np.einsum("ij,ij->i", units[ii], units[jj])
    mean_inter = float(pearson_inter.mean())

    return Theorem1Report(
        mean_raw_cosine=mean_raw,
        mean_centered_pearson_intercluster=mean_inter,
        mean_approx_error=mean_err,
    )


def _approx_cosines(deltas, mu, mu_norm_sq, i, j) -> np.ndarray:
    proj = (deltas @ mu) / mu_norm_sq
    perp = deltas - proj[:, None] * mu
    diff = (perp[i] - perp[j]) / math.sqrt(mu_norm_sq)
    return 1.0 - 0.5 * np.einsum("ij,ij->i", diff, diff)


def _intercluster_pairs(rng, labels: np.ndarray, n_pairs: int):
    n = labels.shape[0]
    out_i = np.empty(n_pairs, dtype=np.int64)
    out_j = np.empty(n_pairs, dtype=np.int64)
    filled = 0
    for _ in range(1000):
        need = n_pairs - filled
        if need == 0:
            break
        i = rng.integers(0, n, size=2 * need + 16)
        j = rng.integers(0, n, size=2 * need + 16)
        ok = labels[i] != labels[j]
        take = min(int(ok.sum()), need)
        out_i[filled : filled + take] = i[ok][:take]
        out_j[filled : filled + take] = j[ok][:take]
        filled += take
    if filled < n_pairs:
        raise ContractError("could not sample inter-cluster pairs; clusters too skewed")
    return out_i, out_j


def evaluate_selection(result: SelectionResult, truth: SynthTruth) -> SelectionEval:
    """Score a selection against ground truth.

    Coverage counts clusters with at least one selected sample;
    min_cluster_share is the smallest per-cluster selected fraction;
    duplicate_prune_rate is the fraction of planted duplicates that were
    NOT selected (0.0 when no duplicates were planted).
    """
    index_of = truth.id_to_index()
    try:
        selected = np.array([index_of[sid] for sid in result.selected_ids], dtype=np.int64)
    except KeyError as exc:
        raise ManifestError(f"selected id {exc.args[0]!r} unknown to truth") from exc

    k = truth.n_clusters
    sel_labels = truth.cluster_of[selected]
    coverage = float(len(np.unique(sel_labels)) / k)

    totals = np.bincount(truth.cluster_of, minlength=k).astype(np.float64)
    picked = np.bincount(sel_labels, minlength=k).astype(np.float64)
    min_share = float(np.min(picked / totals))

    if truth.duplicates_of:
        planted = np.fromiter(truth.duplicates_of.keys(), dtype=np.int64)
        kept = np.intersect1d(planted, selected).size
        prune_rate = 1.0 - kept / planted.size
    else:
        prune_rate = 0.0
    return SelectionEval(
        cluster_coverage=coverage,
        min_cluster_share=min_share,
        duplicate_prune_rate=float(prune_rate),
    )


def compare_selectors(
    config: SynthConfig,
    tau: float,
    seeds: Iterable[int],
    selectors: Sequence[str] = ("prism", "random", "fps", "cosine_redundancy"),
    threads: int | None = None,
) -> list[SelectorSummary]:
    """Mean and stddev of selection metrics per selector across seeds.

    Each seed regenerates the world and reseeds the stochastic selectors,
    so the comparison averages over both data and selector randomness.
    """
    seeds = [int(s) for s in seeds]
    if len(selectors) < 2:
        raise ContractError("compare_selectors needs at least two selectors")
    if len(seeds) < 5:
        raise ContractError("compare_selectors needs at least five seeds")

    per_selector: dict[str, list[SelectionEval]] = {name: [] for name in selectors}
    for seed in seeds:
        ds = generate(replace(config, seed=seed))
        for name in selectors:
            spec = SelectorSpec(name=name, seed=seed if name in ("random", "fps") else None)
            result = spec.run(ds.handle, tau, threads=threads)
            per_selector[name].append(evaluate_selection(result, ds.truth))

    summaries = []
    for name in selectors:
        evals = per_selector[name]
        means, stds = {}, {}
        for metric in METRIC_NAMES:
            vals = np.array([getattr(e, metric) for e in evals], dtype=np.float64)
            means[metric] = float(vals.mean())
            stds[metric] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        summaries.append(
            SelectorSummary(selector=name, n_seeds=len(seeds), means=means, stds=stds)
        )
    return summaries


def _make_presets() -> Mapping[str, SynthConfig]:
    return {
        # Strong drift over four balanced orthogonal clusters: the regime
        # where raw cosines collapse but re-centered correlations do not.
        "theorem1": SynthConfig(
            n_samples=2000,
            dim=512,
            n_clusters=4,
            drift_ratio_target=10.0,
            cluster_spread=1.0,
            residual_sigma=1.0 / math.sqrt(512),
            duplicate_fraction=0.0,
            seed=0,
        ),
        # One dominant cluster, seven rare ones, bursty exact duplicates,
        # and clusters faint enough that raw-space norms are mostly noise:
        # the world where raw-geometry selectors lose rare semantics.
        "corollary1": SynthConfig(
            n_samples=1000,
            dim=256,
            n_clusters=8,
            drift_ratio_target=10.0,
            cluster_spread=0.18,
            residual_sigma=1.0 / 16.0,
            duplicate_fraction=0.3,
            seed=0,
            cluster_weights=(0.965, 0.005, 0.005, 0.005, 0.005, 0.005, 0.005, 0.005),
            duplicate_group_size=25,
        ),
        # Four strong balanced clusters whose centered geometry spans
        # exactly three directions; noise carries under 10% of the energy.
        "spectrum3": SynthConfig(
            n_samples=600,
            dim=64,
            n_clusters=4,
            drift_ratio_target=5.0,
            cluster_spread=1.0,
            residual_sigma=0.02,
            duplicate_fraction=0.0,
            seed=0,
        ),
        # No drift, no cluster structure: a control blob.
        "isotropic": SynthConfig(
            n_samples=5000,
            dim=64,
            n_clusters=1,
            drift_ratio_target=0.0,
            cluster_spread=1.0,
            residual_sigma=1.0,
            duplicate_fraction=0.0,
            seed=0,
        ),
    }


PRESETS: Mapping[str, SynthConfig] = _make_presets()


def get_preset(name: str) -> SynthConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ContractError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
