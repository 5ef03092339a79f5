"""Export conformance against the live consumer toolkit.

Features extracted from the built-in frozen multimodal model must load
cleanly through the consumer's CLI (its wire-format loader is the only
integration surface used) and must exhibit the anisotropy signature:
drift ratio above 1 on real rendered images.
"""

from __future__ import annotations

import json
import subprocess
import sys

from prism_exporter.cli import main_export, main_verify
from prism_exporter.export import ExportConfig, export_features


def run_prism(*args):
    return subprocess.run(
        [sys.executable, "-m", "prism", *args], capture_output=True, text=True
    )


def test_export_conformance(tmp_path):
    out = tmp_path / "features.pfm"
    report = export_features(
        ExportConfig(
            model_id="toy-mm-64",
            dataset_spec="synthetic:48",
            output_path=str(out),
            layer_index=1,
            pooling="mean",
        )
    )
    assert report.n_samples >= 32

    # Loads in the consumer toolkit with zero warnings.
    diag = run_prism("diagnose", str(out), "--k", "8", "--out", "-", "--quiet")
    assert diag.returncode == 0, diag.stderr
    assert diag.stderr == ""
    doc = json.loads(diag.stdout)
    assert doc["drift_ratio"] != "infinite"
    assert doc["drift_ratio"] > 1.0

    score = run_prism("score", str(out), "--out", "-", "--quiet")
    assert score.returncode == 0
    assert score.stderr == ""
    assert len(score.stdout.splitlines()) == report.n_samples + 1

    print(f"[PASS] 10. Export conformance (drift_ratio={doc['drift_ratio']:.3f})")


def test_console_scripts(tmp_path):
    out = tmp_path / "cli.pfm"
    rc = main_export(
        ["--model", "toy-mm-64", "--dataset", "synthetic:8", "--out", str(out)]
    )
    assert rc == 0
    assert main_verify([str(out)]) == 0
    out.write_bytes(out.read_bytes()[:40])
    assert main_verify([str(out)]) == 2
