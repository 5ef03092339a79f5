from __future__ import annotations

import math

import numpy as np
import pytest

from prism.diagnostics import (
    anisotropy_report,
    drift_ratio,
    format_mean_stats_table,
    mean_statistics,
    singular_spectrum,
)
from prism.errors import ContractError
from prism.synthlab import generate, get_preset

from oracles import dense_svd_singular_values, percentile_linear


class TestMeanStatistics:
    def test_simple(self):
        stats = mean_statistics(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert stats.min == 2.0
        assert stats.max == 3.0
        assert stats.mean_abs == 2.5

    def test_all_zero(self):
        stats = mean_statistics(np.zeros((4, 6)))
        assert (stats.min, stats.p25, stats.p75, stats.p99, stats.max, stats.mean_abs) == (
            0.0,
        ) * 6

    def test_symmetric_data_small_mean_abs(self, rng):
        values = rng.standard_normal((10_000, 256))
        stats = mean_statistics(values)
        assert stats.mean_abs < 0.05

    def test_percentiles_match_linear_interpolation_oracle(self, rng):
        values = rng.uniform(-2, 5, size=(37, 23))
        means = values.mean(axis=0)
        stats = mean_statistics(values)
        assert stats.p25 == pytest.approx(percentile_linear(means, 25), abs=1e-12)
        assert stats.p75 == pytest.approx(percentile_linear(means, 75), abs=1e-12)
        assert stats.p99 == pytest.approx(percentile_linear(means, 99), abs=1e-12)

    def test_ordering_invariant(self, rng):
        stats = mean_statistics(rng.standard_normal((50, 40)))
        assert stats.min <= stats.p25 <= stats.p75 <= stats.p99 <= stats.max
        assert stats.mean_abs >= 0


class TestSingularSpectrum:
    def test_rank_one(self):
        # Rows proportional to one direction with mean zero keep rank 1
        # after centering.
        direction = np.array([1.0, 2.0, -1.0, 0.5])
        coeffs = np.array([-2.0, -1.0, 1.0, 2.0])  # zero mean
        values = np.outer(coeffs, direction)
        spec = singular_spectrum(values, k=4)
        assert spec.singular_values[1] <= 1e-9 * spec.singular_values[0]
        assert spec.effective_rank == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_design_flat_spectrum(self):
        n, d, c = 8, 16, 3.0
        values = np.zeros((n, d))
        values[np.arange(n), np.arange(n)] = c
        spec = singular_spectrum(values, k=n)
        sv = np.array(spec.singular_values)
        # Centering knocks out exactly one direction, the rest is flat.
        assert sv[n - 1] <= 1e-9 * sv[0]
        np.testing.assert_allclose(sv[: n - 1], sv[0], rtol=1e-9)
        assert spec.effective_rank == pytest.approx(n - 1, rel=1e-6)
        oracle = dense_svd_singular_values(values)
        np.testing.assert_allclose(sv, oracle[: len(sv)], atol=1e-9 * sv[0])

    def test_planted_three_directions(self):
        ds = generate(get_preset("spectrum3"))
        spec = singular_spectrum(ds.handle.matrix, k=3)
        assert spec.energy_topk >= 0.9
        oracle = dense_svd_singular_values(ds.handle.matrix.values)
        full = singular_spectrum(ds.handle.matrix, k=min(ds.handle.matrix.values.shape))
        got = np.array(full.singular_values)
        mask = got >= 1e-8 * got[0]
        np.testing.assert_allclose(got[mask], oracle[: len(got)][mask], rtol=1e-6)

    def test_gram_path_matches_svd_both_orientations(self, rng):
        for n, d in ((40, 12), (12, 40)):
            values = rng.standard_normal((n, d))
            spec = singular_spectrum(values, k=min(n, d))
            oracle = dense_svd_singular_values(values)
            got = np.array(spec.singular_values)
            mask = got >= 1e-8 * got[0]
            np.testing.assert_allclose(got[mask], oracle[: len(got)][mask], rtol=1e-6)

    def test_energy_sums_to_frobenius(self, rng):
        values = rng.standard_normal((30, 10))
        spec = singular_spectrum(values, k=10)
        centered = values - values.mean(axis=0)
        frob_sq = float((centered**2).sum())
        total = float((np.array(spec.singular_values) ** 2).sum())
        assert total == pytest.approx(frob_sq, rel=1e-6)

    def test_k_out_of_range(self):
        with pytest.raises(ContractError):
            singular_spectrum(np.zeros((3, 3)), k=4)
        with pytest.raises(ContractError):
            singular_spectrum(np.zeros((3, 3)), k=0)

    def test_constant_shift_leaves_spectrum(self, rng):
        values = rng.standard_normal((25, 8))
        shift = rng.standard_normal(8) * 50
        a = singular_spectrum(values, k=8)
        b = singular_spectrum(values + shift, k=8)
        np.testing.assert_allclose(a.singular_values, b.singular_values, atol=1e-8)

    def test_constant_shift_moves_mean_stats(self, rng):
        values = rng.standard_normal((25, 8))
        shift = np.full(8, 3.0)
        a = mean_statistics(values)
        b = mean_statistics(values + shift)
        assert b.min == pytest.approx(a.min + 3.0, abs=1e-9)
        assert b.max == pytest.approx(a.max + 3.0, abs=1e-9)


class TestAnisotropyReport:
    def test_identical_rows_infinite_drift(self):
        values = np.tile(np.array([1.0, 2.0, 3.0], dtype=np.float32), (4, 1))
        report = anisotropy_report(values, k=2)
        assert math.isinf(report.drift_ratio)
        assert report.as_dict()["drift_ratio"] == "infinite"

    def test_zero_matrix_drift(self):
        assert drift_ratio(np.zeros((3, 4))) == 0.0

    def test_isotropic_low_drift(self, rng):
        values = rng.standard_normal((5000, 64))
        report = anisotropy_report(values, k=8)
        assert report.drift_ratio < 0.2

    def test_preset_hits_target(self):
        ds = generate(get_preset("theorem1"))
        report = anisotropy_report(ds.handle.matrix, k=4)
        assert 9.0 <= report.drift_ratio <= 11.0

    def test_threads_do_not_change_results(self, rng):
        values = rng.standard_normal((5000, 32)).astype(np.float32)
        a = anisotropy_report(values, k=8, threads=1)
        b = anisotropy_report(values, k=8, threads=4)
        assert a == b


def test_table_format():
    stats = mean_statistics(np.array([[1.0, 2.0], [3.0, 4.0]]))
    table = format_mean_stats_table([("demo", stats)])
    lines = table.splitlines()
    assert lines[0].split() == ["Dataset", "Min", "P25", "P75", "P99", "Max", "Mean(|x|)"]
    assert lines[2].startswith("demo")
    assert "2.0000" in lines[2] and "3.0000" in lines[2]
