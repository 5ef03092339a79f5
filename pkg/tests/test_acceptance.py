"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion on stdout.
"""

from __future__ import annotations

import functools
import json
import struct
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from prism.feature_store import read_features, write_features
from prism.osc import OscRecord, osc
from prism.redundancy import redundancy_scores, selection_budget, tau_sweep
from prism.synthlab import compare_selectors, generate, get_preset, verify_theorem1

from conftest import make_handle
from oracles import dense_svd_singular_values, naive_redundancy_scores


def criterion(label):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {label}")
                raise
            print(f"[PASS] {label}")

        return wrapper

    return deco


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "prism", *args], capture_output=True, text=True
    )


@criterion("1. OSC reproduction")
def test_osc_reproduction():
    fast = osc(OscRecord(label="sub30", perf_full=100.0, perf_sub=101.7,
                         t_select=1.5, t_tune_sub=28.0, t_tune_full=94.0))
    assert fast.score == pytest.approx(0.3086, abs=0.0005)
    assert fast.viable is True
    heavy = osc(OscRecord(label="heavy", perf_full=100.0, perf_sub=100.6,
                          t_select=87.0, t_tune_sub=14.0, t_tune_full=94.0))
    assert heavy.score == pytest.approx(1.068, abs=0.002)
    assert heavy.viable is False


@criterion("2. Fast/naive score equivalence (50 instances)")
def test_fast_naive_equivalence():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 501))
        d = int(rng.integers(4, 65))
        values = rng.standard_normal((n, d))
        fast = redundancy_scores(make_handle(values)).scores
        naive = naive_redundancy_scores(values)
        worst = max(worst, float(np.abs(fast - naive).max()))
    assert worst <= 1e-6


@criterion("3. Implicit re-centering invariance (20 instances)")
def test_recentering_invariance():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(20, 200))
        d = int(rng.integers(8, 64))
        values = rng.standard_normal((n, d))
        base = redundancy_scores(make_handle(values)).scores
        a = rng.uniform(0.1, 10.0, size=(n, 1))
        b = rng.uniform(-100.0, 100.0, size=(n, 1))
        moved = redundancy_scores(make_handle(a * values + b)).scores
        worst = max(worst, float(np.abs(moved - base).max()))
    assert worst <= 1e-6


@criterion("4. Theorem-1 collapse (10 seeds)")
def test_theorem1_collapse():
    cfg = get_preset("theorem1")
    raw, inter, err10, err5 = [], [], [], []
    for seed in range(10):
        rep10 = verify_theorem1(replace(cfg, seed=seed), n_pairs=2000)
        rep5 = verify_theorem1(
            replace(cfg, seed=seed, drift_ratio_target=5.0), n_pairs=2000
        )
        raw.append(rep10.mean_raw_cosine)
        inter.append(rep10.mean_centered_pearson_intercluster)
        err10.append(rep10.mean_approx_error)
        err5.append(rep5.mean_approx_error)
    assert np.mean(raw) >= 0.97
    assert abs(np.mean(inter)) <= 0.05
    assert np.mean(err10) <= 0.25 * np.mean(err5)


@criterion("5. Corollary-1 separation (20 seeds)")
def test_corollary1_separation():
    cfg = get_preset("corollary1")
    rows = compare_selectors(
        cfg, 30.0, seeds=range(20),
        selectors=("prism", "random", "cosine_redundancy"),
    )
    by_name = {r.selector: r for r in rows}
    prism = by_name["prism"]
    cosine = by_name["cosine_redundancy"]
    random_rows = by_name["random"]
    assert prism.means["cluster_coverage"] >= cosine.means["cluster_coverage"]
    assert prism.means["duplicate_prune_rate"] >= 0.9
    # Random prunes each duplicate with probability 1 - tau/100 = 0.7;
    # allow five standard errors of the 20-seed mean.
    n_dups = int(cfg.duplicate_fraction * cfg.n_samples)
    se = np.sqrt(0.7 * 0.3 / n_dups) / np.sqrt(20)
    assert abs(random_rows.means["duplicate_prune_rate"] - 0.7) <= 5 * se + 0.01


@criterion("6. Selection budget exactness and nesting")
def test_selection_budget_exactness():
    rng = np.random.default_rng(6)
    for n in (10, 999, 10_000):
        values = rng.standard_normal((n, 4)).astype(np.float32)
        handle = make_handle(values)
        taus = [5.0, 10.0, 20.0, 30.0, 100.0]
        results = tau_sweep(handle, taus)
        for tau, result in zip(taus, results):
            expected = max(1, int(np.floor(tau * n / 100.0)))
            assert len(result.selected_ids) == expected
            assert selection_budget(n, tau) == expected
        sets = [set(r.selected_ids) for r in results]
        for smaller, larger in zip(sets, sets[1:]):
            assert smaller <= larger


@criterion("7. Diagnostics consistency")
def test_diagnostics_consistency():
    from prism.diagnostics import anisotropy_report, singular_spectrum

    ds = generate(get_preset("spectrum3"))
    spec = singular_spectrum(ds.handle.matrix, k=3)
    assert spec.energy_topk >= 0.9
    full = singular_spectrum(
        ds.handle.matrix, k=min(ds.handle.matrix.values.shape)
    )
    got = np.array(full.singular_values)
    oracle = dense_svd_singular_values(ds.handle.matrix.values)
    mask = got >= 1e-8 * got[0]
    np.testing.assert_allclose(got[mask], oracle[: len(got)][mask], rtol=1e-6)

    values = np.random.default_rng(7).standard_normal((5000, 64))
    report = anisotropy_report(values, k=8)
    assert report.drift_ratio < 0.2


@criterion("8. CLI determinism across runs and threads")
def test_cli_determinism(tmp_path):
    rng = np.random.default_rng(8)
    pfm = tmp_path / "f.pfm"
    write_features(make_handle(rng.standard_normal((60, 8)).astype(np.float32)), pfm)
    cfg = {
        "n_samples": 80, "dim": 12, "n_clusters": 3, "drift_ratio_target": 5.0,
        "cluster_spread": 1.0, "residual_sigma": 0.3, "duplicate_fraction": 0.1,
        "seed": 1,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))

    def one_round(tag, threads):
        outs = {}
        jobs = {
            "diagnose": ["diagnose", str(pfm)],
            "score": ["score", str(pfm)],
            "select": ["select", str(pfm), "--tau", "30", "--selector", "random",
                        "--seed", "5"],
            "simulate": ["simulate", "--config", str(cfg_path), "--pairs", "300",
                          "--compare", "prism,random", "--taus", "25",
                          "--seeds", "0,1,2,3,4"],
            "osc": ["osc", "--perf-full", "100", "--perf-sub", "101.7",
                     "--t-select", "1.5", "--t-tune-sub", "28",
                     "--t-tune-full", "94"],
        }
        for name, argv in jobs.items():
            out = tmp_path / f"{name}.{tag}.out"
            proc = run_cli(*argv, "--threads", threads, "--out", str(out))
            assert proc.returncode == 0, (name, proc.stderr)
            outs[name] = out.read_bytes()
        return outs

    first = one_round("a", "1")
    again = one_round("b", "1")
    wide = one_round("c", "4")
    assert first == again
    assert first == wide


@criterion("9. Format round-trip and corrupted-header rejection")
def test_format_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    for i in range(100):
        n = int(rng.integers(1, 30))
        d = int(rng.integers(2, 17))
        values = rng.standard_normal((n, d)).astype(np.float32)
        handle = make_handle(values)
        path = tmp_path / "roundtrip.pfm"
        write_features(handle, path)
        loaded = read_features(path)
        assert loaded.matrix.values.tobytes() == values.tobytes()
        assert loaded.manifest == handle.manifest

    base_path = tmp_path / "base.pfm"
    write_features(make_handle(rng.standard_normal((6, 4)).astype(np.float32)), base_path)
    base = base_path.read_bytes()

    def mutate(offset, data):
        raw = bytearray(base)
        raw[offset : offset + len(data)] = data
        return bytes(raw)

    corpus = [
        b"ZZZZ" + base[4:],
        mutate(4, struct.pack("<I", 2)),
        mutate(8, struct.pack("<Q", 0)),
        mutate(8, struct.pack("<Q", 7)),
        mutate(16, struct.pack("<I", 1)),
        mutate(16, struct.pack("<I", 64)),
        mutate(20, b"\x09"),
        mutate(24, b"\xff"),
        base[: 32 + 5 * 4 * 3],
        base[:16],
    ]
    bad = tmp_path / "bad.pfm"
    (tmp_path / "bad.manifest.json").write_text(
        (tmp_path / "base.manifest.json").read_text()
    )
    for i, raw in enumerate(corpus):
        bad.write_bytes(raw)
        proc = run_cli("score", str(bad), "--out", "-")
        assert proc.returncode == 2, f"mutation {i} returned {proc.returncode}"
