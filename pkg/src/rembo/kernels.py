"""Stationary kernels over the low-dimensional domain, with three ways of
measuring distance between points.

A kernel spec pairs a correlation family (squared exponential or Matern
5/2) with a *distance mode*: compare points directly in the
low-dimensional space, compare their clamped images in the ambient
cube, or compare their warped images.  Each mode pulls back a Euclidean
metric, so every resulting kernel is positive definite; a small nugget
still matters because the clamped mode maps distinct points onto
identical images, which makes covariance matrices exactly singular.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from rembo.geometry import Embedding, warp_batch

_SQRT5 = np.sqrt(5.0)

# relative to the process variance; enough to factorize duplicate images
DEFAULT_NUGGET_REL = 1e-8


class KernelFamily(str, Enum):
    SQUARED_EXPONENTIAL = "se"
    MATERN52 = "matern52"


class DistanceMode(str, Enum):
    """Where distances between low-dimensional points are measured."""

    LOW_DIM = "kY"   # directly in the embedding domain
    CLAMPED = "kX"   # between clamped ambient images
    WARPED = "kPsi"  # between warped ambient images


@dataclass(frozen=True)
class KernelSpec:
    """Isotropic stationary kernel: family, hyperparameters, distance mode."""

    family: KernelFamily
    variance: float
    lengthscale: float
    mode: DistanceMode

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")

    def with_hyperparameters(self, variance: float, lengthscale: float) -> "KernelSpec":
        return replace(self, variance=variance, lengthscale=lengthscale)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "variance": self.variance,
            "lengthscale": self.lengthscale,
            "mode": self.mode.value,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelSpec":
        return cls(
            family=KernelFamily(doc["family"]),
            variance=float(doc["variance"]),
            lengthscale=float(doc["lengthscale"]),
            mode=DistanceMode(doc["mode"]),
        )


def effective_images(mode: DistanceMode, e: Embedding, ys) -> np.ndarray:
    """Map low-dimensional points (n, d) to the images the mode compares.

    LOW_DIM returns the points themselves; CLAMPED returns the clamped
    ambient images; WARPED returns the warped images.
    """
    ys = np.asarray(ys, dtype=float)
    if mode is DistanceMode.LOW_DIM:
        return ys
    if mode is DistanceMode.CLAMPED:
        return np.clip(ys @ e.A.T, -1.0, 1.0)
    return warp_batch(e, ys)


def effective_distance(spec: KernelSpec, e: Embedding, y1, y2) -> float:
    """Distance between two points under the spec's mode."""
    pair = np.vstack([np.asarray(y1, float), np.asarray(y2, float)])
    img = effective_images(spec.mode, e, pair)
    return float(np.linalg.norm(img[0] - img[1]))


def distance_matrix(spec: KernelSpec, e: Embedding, ys) -> np.ndarray:
    """Pairwise effective distances, exactly symmetric with zero diagonal."""
    img = effective_images(spec.mode, e, ys)
    r = cdist(img, img)
    r = np.triu(r, k=1)
    return r + r.T


def correlation(spec: KernelSpec, r) -> np.ndarray | float:
    """Correlation at distance ``r`` (scalar or array): 1 at r=0, decreasing.

    Squared exponential: exp(-r^2 / (2 l^2)).
    Matern 5/2 with s = sqrt(5) r / l: (1 + s + s^2/3) exp(-s).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distances must be nonnegative")
    if spec.family is KernelFamily.SQUARED_EXPONENTIAL:
        out = np.exp(-(r * r) / (2.0 * spec.lengthscale**2))
    else:
        s = _SQRT5 * r / spec.lengthscale
        out = (1.0 + s + s * s / 3.0) * np.exp(-s)
    return out if out.ndim else float(out)


def covariance_matrix(
    spec: KernelSpec, e: Embedding, ys, nugget: float | None = None
) -> np.ndarray:
    """Covariance matrix ``variance * corr(dist) + nugget * I``.

    ``nugget=None`` uses the default ``1e-8 * variance``; pass ``0.0``
    explicitly to see the raw (possibly singular) matrix.
    """
    if nugget is None:
        nugget = DEFAULT_NUGGET_REL * spec.variance
    if nugget < 0:
        raise ValueError(f"nugget must be nonnegative, got {nugget}")
    r = distance_matrix(spec, e, ys)
    return covariance_from_distances(spec, r, nugget)


def covariance_from_distances(spec: KernelSpec, r: np.ndarray, nugget: float) -> np.ndarray:
    """Covariance from a precomputed symmetric distance matrix.

    Split out so that hyperparameter search can reuse one distance
    matrix across many (variance, lengthscale) candidates.
    """
    k = spec.variance * np.asarray(correlation(spec, r))
    k = np.triu(k, k=1)
    k = k + k.T
    np.fill_diagonal(k, spec.variance + nugget)
    return k
