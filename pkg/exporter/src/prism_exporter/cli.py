"""Console entry points: ``export_features`` and ``verify_export``."""

from __future__ import annotations

import argparse
import sys

from .errors import ExportError
from .export import ExportConfig, export_features, verify_export
from .pfm import manifest_path_for
from .toy_model import MODEL_BUILDERS


def main_export(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export_features",
        description=(
            "Extract pooled layer hidden states over the visual tokens of a "
            "frozen multimodal model and write a PFM feature file."
        ),
    )
    parser.add_argument("--model", required=True,
                        help=f"model id ({', '.join(sorted(MODEL_BUILDERS))})")
    parser.add_argument("--dataset", required=True,
                        help="dataset spec: synthetic:N or an image directory")
    parser.add_argument("--layer", type=int, default=1,
                        help="1-based transformer block index (default: 1)")
    parser.add_argument("--pooling", choices=("mean", "last_token"), default="mean")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--max-samples", type=int, default=None)
    parser.add_argument("--out", required=True, help="output .pfm path")
    args = parser.parse_args(argv)

    config = ExportConfig(
        model_id=args.model,
        dataset_spec=args.dataset,
        output_path=args.out,
        layer_index=args.layer,
        pooling=args.pooling,
        batch_size=args.batch_size,
        max_samples=args.max_samples,
    )
    try:
        report = export_features(config)
    except ExportError as exc:
        print(f"export_features: error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {report.n_samples} x {report.dim} features "
        f"(model {report.model_id}, layer {report.layer_index}, "
        f"{report.pooling} pooling) to {report.output_path}",
        file=sys.stderr,
    )
    print(f"manifest: {manifest_path_for(report.output_path)}", file=sys.stderr)
    return 0


def main_verify(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="verify_export", description="Validate a PFM feature file."
    )
    parser.add_argument("path", help=".pfm file to check")
    args = parser.parse_args(argv)
    try:
        info = verify_export(args.path)
    except ExportError as exc:
        print(f"verify_export: error: {exc}", file=sys.stderr)
        return 2
    print(f"ok: {info.n_samples} samples x {info.dim} dims, manifest consistent")
    return 0


if __name__ == "__main__":
    sys.exit(main_export())
