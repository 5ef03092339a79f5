"""Similarity kernels on embedding vectors.

Covers the mean/residual decomposition of a feature set, raw cosine
similarity, the implicitly re-centered correlation used for redundancy
scoring, and the second-order drift approximation of the cosine between
two drift-dominated vectors.

All reductions run in float64 regardless of input dtype. Clamping of
similarity values into [-1, 1] happens after the final division, never
on intermediate dot products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DegenerateInputError
from .feature_store import FeatureMatrix

# A vector counts as degenerate (no internal variation) when its centered
# norm falls below this multiple of sqrt(dim). The scale distinguishes a
# true constant vector from a small-variance one at float32 storage
# precision.
DEGENERACY_EPS = 1e-12


def degeneracy_threshold(dim: int) -> float:
    return DEGENERACY_EPS * math.sqrt(dim)


def _as_values(matrix) -> np.ndarray:
    if isinstance(matrix, FeatureMatrix):
        return matrix.values
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise ContractError("expected a 2-D matrix")
    return arr


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError("expected a 1-D vector")
    return arr


@dataclass(frozen=True)
class DriftDecomposition:
    """Split of a feature set into its shared mean and per-sample residuals.

    ``global_mean + residuals[i]`` reconstructs row i of the source matrix
    up to one float64 rounding step, and the residual columns have mean
    zero at accumulation precision.
    """

    global_mean: np.ndarray
    residuals: np.ndarray


def decompose(matrix) -> DriftDecomposition:
    """Decompose rows into the arithmetic mean plus residuals, in float64."""
    values = _as_values(matrix)
    mean = values.mean(axis=0, dtype=np.float64)
    residuals = values.astype(np.float64, copy=True)
    residuals -= mean
    return DriftDecomposition(global_mean=mean, residuals=residuals)


def cosine(a, b) -> float:
    """Cosine similarity, clamped into [-1, 1] after the division."""
    va, vb = _as_vector(a), _as_vector(b)
    na = math.sqrt(float(va @ va))
    nb = math.sqrt(float(vb @ vb))
    if na == 0.0 or nb == 0.0:
        raise DegenerateInputError("cosine undefined for zero-norm input")
    return _clamp(float(va @ vb) / (na * nb))


@dataclass(frozen=True)
class CenteredUnitVector:
    """A vector minus its scalar element mean, scaled to unit norm.

    ``degenerate`` is set instead of raising when the centered norm falls
    below the degeneracy threshold; the values are then all zero.
    """

    values: np.ndarray
    degenerate: bool


def center_normalize(v) -> CenteredUnitVector:
    """Subtract the scalar element mean, then divide by the centered norm."""
    vec = _as_vector(v)
    if vec.shape[0] < 2:
        raise ContractError("center_normalize needs dimension >= 2")
    centered = vec - vec.mean()
    norm = math.sqrt(float(centered @ centered))
    if norm < degeneracy_threshold(vec.shape[0]):
        return CenteredUnitVector(np.zeros_like(centered), degenerate=True)
    return CenteredUnitVector(centered / norm, degenerate=False)


def centered_unit_rows(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``center_normalize`` over matrix rows.

    Returns the float64 unit-row matrix (degenerate rows zeroed) and a
    boolean mask marking degenerate rows.
    """
    x = np.asarray(values).astype(np.float64, copy=True)
    x -= x.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(x, axis=1)
    degenerate = norms < degeneracy_threshold(x.shape[1])
    safe = np.where(degenerate, 1.0, norms)
    x /= safe[:, None]
    x[degenerate] = 0.0
    return x, degenerate


def unit_rows(values: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm without centering; zero-norm rows reject."""
    x = np.asarray(values).astype(np.float64, copy=True)
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateInputError("zero-norm row in feature matrix")
    x /= norms[:, None]
    return x


def pearson(a, b) -> float:
    """Correlation of two vectors via their centered unit forms.

    Equals the cosine of the centered vectors, which makes it invariant to
    per-vector location shifts and positive rescaling.
    """
    ua = center_normalize(a)
    ub = center_normalize(b)
    if ua.degenerate or ub.degenerate:
        raise DegenerateInputError("pearson undefined for a constant vector")
    return _clamp(float(ua.values @ ub.values))


@dataclass(frozen=True)
class DriftCosineApprox:
    exact: float
    approx: float
    residual_error: float


def drift_cosine_approx(mu, delta_i, delta_j) -> DriftCosineApprox:
    """Second-order approximation of cos(mu+delta_i, mu+delta_j).

    Uses the components of the residuals orthogonal to the shared mean:
    approx = 1 - 0.5 * ||di_perp/||mu|| - dj_perp/||mu||||^2. The closer
    the drift dominates the residuals, the smaller the residual error.
    """
    m = _as_vector(mu)
    di = _as_vector(delta_i)
    dj = _as_vector(delta_j)
    mu_norm_sq = float(m @ m)
    if mu_norm_sq == 0.0:
        raise DegenerateInputError("drift approximation needs a nonzero mean vector")
    exact = cosine(m + di, m + dj)
    di_perp = di - (float(m @ di) / mu_norm_sq) * m
    dj_perp = dj - (float(m @ dj) / mu_norm_sq) * m
    diff = (di_perp - dj_perp) / math.sqrt(mu_norm_sq)
    approx = 1.0 - 0.5 * float(diff @ diff)
    return DriftCosineApprox(
        exact=exact, approx=approx, residual_error=abs(exact - approx)
    )


def _clamp(x: float) -> float:
    return min(1.0, max(-1.0, x))
