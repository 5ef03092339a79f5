"""Anisotropy diagnosis of an embedding set.

Three views: the distribution of per-dimension means (is the cloud
centered?), the singular spectrum of the mean-centered matrix (how many
directions carry the variance?), and the drift ratio ||mu|| / E||delta||
(does one shared component dominate the residuals?).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import map_row_blocks
from .errors import ContractError
from .feature_store import FeatureMatrix

# The exact Gram-based spectrum is quadratic in the smaller matrix side;
# beyond this an iterative solver would be needed, which is out of scope.
MAX_GRAM_SIDE = 4096

# Eigenvalues of the Gram matrix below this fraction of the largest are
# indistinguishable from symmetric-eigensolver rounding noise (~1e-15 of
# lambda_1) and are reported as exact zeros. Singular values the Gram
# route genuinely cannot resolve (sigma below ~3e-6 of sigma_1) are
# therefore zeroed rather than reported as noise.
GRAM_NOISE_FLOOR = 1e-11


@dataclass(frozen=True)
class MeanStats:
    """Summary statistics of the per-dimension mean vector."""

    min: float
    p25: float
    p75: float
    p99: float
    max: float
    mean_abs: float

    def as_dict(self) -> dict:
        return {
            "min": self.min,
            "p25": self.p25,
            "p75": self.p75,
            "p99": self.p99,
            "max": self.max,
            "mean_abs": self.mean_abs,
        }


@dataclass(frozen=True)
class SpectrumReport:
    """Top-k singular values of the centered matrix plus summary measures.

    ``energy_topk`` is the fraction of total squared singular mass carried
    by the reported values; ``effective_rank`` is the exponential of the
    spectral entropy of the squared-singular-value shares.
    """

    singular_values: tuple[float, ...]
    energy_topk: float
    effective_rank: float

    def as_dict(self) -> dict:
        return {
            "singular_values": list(self.singular_values),
            "energy_topk": self.energy_topk,
            "effective_rank": self.effective_rank,
        }


@dataclass(frozen=True)
class AnisotropyReport:
    mean_stats: MeanStats
    spectrum: SpectrumReport
    drift_ratio: float

    def as_dict(self) -> dict:
        ratio = "infinite" if math.isinf(self.drift_ratio) else self.drift_ratio
        return {
            "mean_stats": self.mean_stats.as_dict(),
            "spectrum": self.spectrum.as_dict(),
            "drift_ratio": ratio,
        }


def _values(matrix) -> np.ndarray:
    return matrix.values if isinstance(matrix, FeatureMatrix) else np.asarray(matrix)


def column_means(matrix, threads: int | None = None) -> np.ndarray:
    """Float64 per-dimension means, accumulated over fixed row blocks."""
    values = _values(matrix)
    n = values.shape[0]
    partials = map_row_blocks(
        n, lambda a, b: values[a:b].sum(axis=0, dtype=np.float64), threads
    )
    total = np.zeros(values.shape[1], dtype=np.float64)
    for p in partials:
        total += p
    return total / n


def mean_statistics(matrix, threads: int | None = None) -> MeanStats:
    """Distribution statistics of the per-dimension mean vector.

    Percentiles use linear interpolation between order statistics.
    """
    means = column_means(matrix, threads)
    p25, p75, p99 = np.percentile(means, [25, 75, 99], method="linear")
    return MeanStats(
        min=float(means.min()),
        p25=float(p25),
        p75=float(p75),
        p99=float(p99),
        max=float(means.max()),
        mean_abs=float(np.abs(means).mean()),
    )


def _centered_gram(values: np.ndarray, mu: np.ndarray, threads: int | None) -> np.ndarray:
    """d x d Gram matrix of the row-centered data, blocked and in order."""
    d = values.shape[1]
    n = values.shape[0]

    def block_gram(a: int, b: int) -> np.ndarray:
        block = values[a:b].astype(np.float64) - mu
        return block.T @ block

    partials = map_row_blocks(n, block_gram, threads)
    gram = np.zeros((d, d), dtype=np.float64)
    for p in partials:
        gram += p
    return gram


def singular_spectrum(matrix, k: int, threads: int | None = None) -> SpectrumReport:
    """Top-k singular values of the mean-centered matrix.

    Computed exactly from the smaller-side Gram matrix with a symmetric
    eigendecomposition (sigma = sqrt(lambda), clamped at zero), which
    avoids an iterative solver at desk scale. ``energy_topk`` and
    ``effective_rank`` always use the full spectrum.
    """
    values = _values(matrix)
    n, d = values.shape
    small = min(n, d)
    if not 1 <= k <= small:
        raise ContractError(f"k={k} out of range, need 1 <= k <= {small}")
    if small > MAX_GRAM_SIDE:
        raise ContractError(
            f"min(N, d)={small} exceeds the exact-spectrum limit of {MAX_GRAM_SIDE}"
        )
    mu = column_means(values, threads)
    if d <= n:
        gram = _centered_gram(values, mu, threads)
    else:
        centered = values.astype(np.float64) - mu
        gram = centered @ centered.T
    eigvals = np.linalg.eigvalsh(gram)[::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    if eigvals.size and eigvals[0] > 0.0:
        eigvals[eigvals < GRAM_NOISE_FLOOR * eigvals[0]] = 0.0
    return _spectrum_from_eigvals(eigvals, k)


def _spectrum_from_eigvals(eigvals: np.ndarray, k: int) -> SpectrumReport:
    total = float(eigvals.sum())
    sigmas = np.sqrt(eigvals)
    if total <= 0.0:
        # Centered matrix is exactly zero: no variance anywhere.
        return SpectrumReport(
            singular_values=tuple(float(s) for s in sigmas[:k]),
            energy_topk=1.0,
            effective_rank=1.0,
        )
    energy_topk = float(eigvals[:k].sum() / total)
    shares = eigvals[eigvals > 0.0] / total
    entropy = float(-(shares * np.log(shares)).sum())
    return SpectrumReport(
        singular_values=tuple(float(s) for s in sigmas[:k]),
        energy_topk=energy_topk,
        effective_rank=float(math.exp(entropy)),
    )


def drift_ratio(matrix, threads: int | None = None) -> float:
    """||mu||_2 divided by the mean residual norm, +inf if residuals vanish."""
    values = _values(matrix)
    n = values.shape[0]
    mu = column_means(values, threads)

    def block_norm_sum(a: int, b: int) -> float:
        block = values[a:b].astype(np.float64) - mu
        return float(np.linalg.norm(block, axis=1).sum())

    partials = map_row_blocks(n, block_norm_sum, threads)
    mean_residual_norm = math.fsum(partials) / n
    mu_norm = float(np.linalg.norm(mu))
    if mean_residual_norm == 0.0:
        return math.inf if mu_norm > 0.0 else 0.0
    return mu_norm / mean_residual_norm


def anisotropy_report(matrix, k: int, threads: int | None = None) -> AnisotropyReport:
    return AnisotropyReport(
        mean_stats=mean_statistics(matrix, threads),
        spectrum=singular_spectrum(matrix, k, threads),
        drift_ratio=drift_ratio(matrix, threads),
    )


_TABLE_COLUMNS = ("Min", "P25", "P75", "P99", "Max", "Mean(|x|)")


def format_mean_stats_table(rows) -> str:
    """Plain-text table of per-dimension mean statistics.

    ``rows`` is a sequence of ``(label, MeanStats)`` pairs; one line per
    dataset with columns Min, P25, P75, P99, Max, Mean(|x|).
    """
    rendered: list[list[str]] = []
    for label, stats in rows:
        rendered.append(
            [
                str(label),
                f"{stats.min:.4f}",
                f"{stats.p25:.4f}",
                f"{stats.p75:.4f}",
                f"{stats.p99:.4f}",
                f"{stats.max:.4f}",
                f"{stats.mean_abs:.4f}",
            ]
        )
    header = ["Dataset", *_TABLE_COLUMNS]
    widths = [
        max(len(header[c]), *(len(r[c]) for r in rendered)) if rendered else len(header[c])
        for c in range(len(header))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in rendered:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"
