from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from prism.baselines import SelectorSpec
from prism.errors import ContractError, ManifestError
from prism.redundancy import SelectionResult, redundancy_scores, select
from prism.synthlab import (
    SynthConfig,
    compare_selectors,
    evaluate_selection,
    generate,
    get_preset,
    verify_theorem1,
)


def small_config(**overrides):
    base = dict(
        n_samples=400,
        dim=32,
        n_clusters=4,
        drift_ratio_target=10.0,
        cluster_spread=1.0,
        residual_sigma=0.2,
        duplicate_fraction=0.0,
        seed=0,
    )
    base.update(overrides)
    return SynthConfig(**base)


class TestConfigValidation:
    def test_cluster_dim_room(self):
        with pytest.raises(ContractError):
            small_config(dim=4, n_clusters=4)

    def test_bad_duplicate_fraction(self):
        with pytest.raises(ContractError):
            small_config(duplicate_fraction=1.0)

    def test_bad_weights(self):
        with pytest.raises(ContractError):
            small_config(cluster_weights=(1.0, 2.0))


class TestGenerate:
    def test_determinism(self):
        cfg = small_config(duplicate_fraction=0.2)
        a = generate(cfg)
        b = generate(cfg)
        assert a.handle.matrix.values.tobytes() == b.handle.matrix.values.tobytes()
        assert a.truth.duplicates_of == b.truth.duplicates_of
        assert np.array_equal(a.truth.cluster_of, b.truth.cluster_of)

    def test_exact_duplicate_count_and_bytes(self):
        ds = generate(small_config(n_samples=1000, duplicate_fraction=0.2))
        dups = ds.truth.duplicates_of
        assert len(dups) == 200
        values = ds.handle.matrix.values
        for dup, orig in dups.items():
            assert values[dup].tobytes() == values[orig].tobytes()
            assert ds.truth.cluster_of[dup] == ds.truth.cluster_of[orig]

    def test_isotropic_blob(self):
        ds = generate(
            small_config(
                n_samples=5000, dim=64, n_clusters=1, drift_ratio_target=0.0,
                residual_sigma=1.0,
            )
        )
        assert ds.truth.realized_drift_ratio < 0.2

    def test_realized_ratio_near_target(self):
        for target in (2.0, 5.0, 10.0):
            ds = generate(small_config(n_samples=1500, drift_ratio_target=target))
            assert abs(ds.truth.realized_drift_ratio - target) <= 0.1 * target

    def test_manifest_and_truth_aligned(self):
        ds = generate(small_config())
        assert ds.handle.manifest.ids() == ds.truth.sample_ids
        sources = {e.source_tag for e in ds.handle.manifest.entries}
        assert sources == {f"cluster-{k}" for k in range(4)}

    def test_cluster_weights_apportionment(self):
        cfg = small_config(
            n_samples=100, n_clusters=4, cluster_weights=(0.7, 0.1, 0.1, 0.1)
        )
        ds = generate(cfg)
        counts = np.bincount(ds.truth.cluster_of, minlength=4)
        assert counts.sum() == 100
        assert counts[0] == 70


class TestTheorem1:
    def test_collapse_and_contrast(self):
        cfg = get_preset("theorem1")
        report = verify_theorem1(cfg, n_pairs=2000)
        assert report.mean_raw_cosine >= 0.97
        assert abs(report.mean_centered_pearson_intercluster) <= 0.05

    def test_error_decreases_with_drift(self):
        cfg = small_config(n_samples=800, dim=128, residual_sigma=1.0 / 12)
        low = verify_theorem1(replace(cfg, drift_ratio_target=5.0), n_pairs=1500)
        high = verify_theorem1(replace(cfg, drift_ratio_target=10.0), n_pairs=1500)
        assert high.mean_approx_error < low.mean_approx_error

    def test_raw_cosine_monotone_in_drift(self):
        cfg = get_preset("theorem1")
        means = [
            verify_theorem1(replace(cfg, drift_ratio_target=float(r)), n_pairs=1500).mean_raw_cosine
            for r in (1, 2, 5, 10, 20)
        ]
        inversions = [d for d in np.diff(means) if d < 0]
        assert len(inversions) <= 1
        assert all(abs(d) <= 0.005 for d in inversions)

    def test_needs_clusters_and_pairs(self):
        with pytest.raises(ContractError):
            verify_theorem1(small_config(n_clusters=1), n_pairs=500)
        with pytest.raises(ContractError):
            verify_theorem1(small_config(), n_pairs=10)


class TestEvaluateSelection:
    def test_full_selection(self):
        ds = generate(small_config(duplicate_fraction=0.1))
        scores = redundancy_scores(ds.handle)
        result = select(scores, ds.handle.manifest, 100.0)
        ev = evaluate_selection(result, ds.truth)
        assert ev.cluster_coverage == 1.0
        assert ev.duplicate_prune_rate == 0.0
        assert ev.min_cluster_share == 1.0

    def test_unknown_id(self):
        ds = generate(small_config())
        result = select(redundancy_scores(ds.handle), ds.handle.manifest, 10.0)
        other = generate(small_config(n_samples=50, seed=9))
        with pytest.raises(ManifestError):
            evaluate_selection(result, other.truth)

    def test_one_sample_per_cluster_full_coverage(self):
        ds = generate(small_config(n_samples=40))
        picks = []
        for cluster in range(4):
            picks.append(int(np.flatnonzero(ds.truth.cluster_of == cluster)[0]))
        result = SelectionResult(
            selected_ids=tuple(ds.truth.sample_ids[i] for i in sorted(picks)),
            tau_percent=10.0,
            threshold_value=float("nan"),
            selector_name="manual",
        )
        ev = evaluate_selection(result, ds.truth)
        assert ev.cluster_coverage == 1.0

    def test_duplicates_score_above_median(self):
        # Weak cluster correlation keeps the score distribution flat, so
        # the bursty duplicate mass dominates: every planted copy must
        # rank above the median.
        cfg = SynthConfig(
            n_samples=800, dim=1024, n_clusters=4, drift_ratio_target=10.0,
            cluster_spread=0.25, residual_sigma=1.0 / 32, duplicate_fraction=0.3,
            seed=0, duplicate_group_size=40,
        )
        for seed in (0, 1, 2):
            ds = generate(replace(cfg, seed=seed))
            scores = redundancy_scores(ds.handle).scores
            median = np.median(scores)
            planted = list(ds.truth.duplicates_of.keys())
            assert all(scores[i] > median for i in planted)

    def test_prism_prunes_planted_duplicates(self):
        ds = generate(get_preset("corollary1"))
        result = select(redundancy_scores(ds.handle), ds.handle.manifest, 30.0)
        ev = evaluate_selection(result, ds.truth)
        assert ev.duplicate_prune_rate >= 0.9


class TestCompareSelectors:
    def test_validation(self):
        cfg = small_config()
        with pytest.raises(ContractError):
            compare_selectors(cfg, 30.0, seeds=range(3))
        with pytest.raises(ContractError):
            compare_selectors(cfg, 30.0, seeds=range(5), selectors=("prism",))

    def test_tau_100_identical_metrics(self):
        cfg = small_config(n_samples=60, duplicate_fraction=0.1)
        rows = compare_selectors(cfg, 100.0, seeds=range(5))
        first = rows[0]
        for row in rows[1:]:
            assert row.means == first.means

    def test_prism_beats_random_on_duplicates(self):
        cfg = get_preset("corollary1")
        rows = compare_selectors(
            cfg, 30.0, seeds=range(5), selectors=("prism", "random")
        )
        by_name = {r.selector: r for r in rows}
        assert (
            by_name["prism"].means["duplicate_prune_rate"]
            > by_name["random"].means["duplicate_prune_rate"]
        )

    def test_corollary_strict_coverage_separation(self):
        # Tight budget on the imbalanced preset: re-centered correlation
        # keeps all rare clusters, raw-cosine redundancy loses them.
        cfg = get_preset("corollary1")
        rows = compare_selectors(
            cfg, 5.0, seeds=range(20), selectors=("prism", "cosine_redundancy")
        )
        by_name = {r.selector: r for r in rows}
        prism_cov = by_name["prism"].means["cluster_coverage"]
        cosine_cov = by_name["cosine_redundancy"].means["cluster_coverage"]
        assert prism_cov >= cosine_cov
        assert prism_cov - cosine_cov > 0.05


def test_selector_spec_round_trip_on_synth():
    ds = generate(small_config(n_samples=100))
    for name in ("prism", "random", "fps", "cosine_redundancy"):
        result = SelectorSpec(name=name, seed=3).run(ds.handle, 20.0)
        ev = evaluate_selection(result, ds.truth)
        assert 0.0 <= ev.cluster_coverage <= 1.0
