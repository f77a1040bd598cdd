"""Deterministic geometry of random linear embeddings into a hypercube.

A low-dimensional point ``y`` is mapped into the ambient cube
``X = [-1, 1]^D`` by a random Gaussian matrix ``A`` (D x d).  Points that
land outside the cube are clamped onto it coordinatewise; the clamped
image can then be pulled back onto the span of ``A`` and stretched along
its own ray so that its distance from the cube boundary matches the
clamped point's.  The stretched image keeps every pairwise distance
d-dimensional, which is what the warped kernel mode relies on.

Everything here is pure and immutable: an :class:`Embedding` never
changes after construction, so all operations are safe to call from any
number of threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

# |coordinate| <= 1 + MEMBERSHIP_TOL counts as inside the cube; on the
# boundary both warp branches agree, so the tolerance only stops branch
# flapping from float noise.
MEMBERSHIP_TOL = 1e-12

# Below this Euclidean norm the back-projection has no usable direction
# and the warp falls back to returning it unchanged.
PIVOT_TOL = 1e-12

_RESAMPLE_ATTEMPTS = 5
_MAX_GRAM_CONDITION = 1e12


class DegeneratePivotWarning(RuntimeWarning):
    """The back-projection of a clamped point vanished; warp returned it as is."""


@dataclass(frozen=True)
class Embedding:
    """A random linear embedding of R^d into R^D with cached derived data.

    Attributes
    ----------
    A : ndarray, shape (D, d)
        Embedding matrix; columns span the embedded subspace.
    D, d : int
        Ambient and embedding dimensions, 1 <= d <= D.
    proj : ndarray, shape (D, D)
        Orthogonal projector onto the column span of ``A``, i.e.
        ``A (A^T A)^-1 A^T``.  Symmetric and idempotent; the d x d solve
        behind it happens exactly once, at construction.
    gamma : float
        Smallest box half-width ``g`` such that the image of
        ``[-g, g]^d`` under ``A`` spans [-1, 1] in every ambient
        coordinate.  NaN when some row of ``A`` is entirely zero (that
        coordinate can never be spanned); use :func:`gamma_bound` for a
        checked accessor.
    seed : int or None
        Seed the matrix was drawn from, if any.  Kept so a run can be
        replayed bit-exactly.
    """

    A: np.ndarray
    D: int
    d: int
    proj: np.ndarray
    gamma: float
    seed: int | None = None

    def to_dict(self) -> dict:
        """JSON-ready document; ``A`` is stored row-major."""
        return {
            "D": self.D,
            "d": self.d,
            "seed": self.seed,
            "A": [float(v) for v in self.A.ravel(order="C")],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Embedding":
        A = np.array(doc["A"], dtype=float).reshape(doc["D"], doc["d"])
        return embedding_from_matrix(A, seed=doc["seed"])


def embedding_from_matrix(A, seed: int | None = None) -> Embedding:
    """Build an :class:`Embedding` around an explicit matrix.

    Raises
    ------
    numpy.linalg.LinAlgError
        If ``A^T A`` is not invertible to working precision.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"embedding matrix must be 2-d, got shape {A.shape}")
    D, d = A.shape
    if not 1 <= d <= D:
        raise ValueError(f"need 1 <= d <= D, got D={D}, d={d}")
    gram = A.T @ A
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > _MAX_GRAM_CONDITION:
        raise np.linalg.LinAlgError(
            f"A^T A is singular to working precision (condition number "
            f"{np.linalg.cond(gram):.3g}); the embedding is rank-deficient"
        )
    proj = A @ np.linalg.solve(gram, A.T)
    proj = (proj + proj.T) / 2.0  # solve leaves ~1e-16 asymmetry
    try:
        gamma = gamma_from_matrix(A)
    except ValueError:
        gamma = float("nan")
    A.setflags(write=False)
    proj.setflags(write=False)
    return Embedding(A=A, D=D, d=d, proj=proj, gamma=gamma, seed=seed)


def sample_embedding(D: int, d: int, rng_seed: int) -> Embedding:
    """Draw a D x d matrix with i.i.d. standard normal entries.

    The draw comes from a counter-based generator keyed by ``rng_seed``,
    so the same seed always yields the bit-identical matrix.  A
    rank-deficient draw (probability zero in exact arithmetic) is
    resampled internally a fixed number of times before failing.
    """
    if not 1 <= d <= D:
        raise ValueError(f"need 1 <= d <= D, got D={D}, d={d}")
    if rng_seed < 0:
        raise ValueError(f"rng_seed must be nonnegative, got {rng_seed}")
    for attempt in range(_RESAMPLE_ATTEMPTS):
        key = np.array([rng_seed, attempt], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        A = gen.standard_normal((D, d))
        try:
            return embedding_from_matrix(A, seed=rng_seed)
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError(
        f"could not draw a full-rank {D}x{d} embedding in "
        f"{_RESAMPLE_ATTEMPTS} attempts (seed {rng_seed})"
    )


def convex_project(x) -> np.ndarray:
    """Clamp each coordinate to [-1, 1]: the nearest point of the cube."""
    return np.clip(np.asarray(x, dtype=float), -1.0, 1.0)


def back_project(e: Embedding, x) -> np.ndarray:
    """Orthogonal projection of ``x`` onto the column span of ``A``.

    Accepts a single vector of length D or a stack of rows (n, D).  The
    result lies in the span but may fall outside the cube.
    """
    return np.asarray(x, dtype=float) @ e.proj


def warp(e: Embedding, y) -> np.ndarray:
    """Warped image of a single low-dimensional point; see :func:`warp_batch`."""
    y = np.asarray(y, dtype=float)
    return warp_batch(e, y[None, :])[0]


def warp_batch(e: Embedding, ys) -> np.ndarray:
    """Map low-dimensional points to their warped high-dimensional images.

    For each row ``y``: if ``A y`` lies in the cube the image is ``A y``
    itself.  Otherwise the clamped point is back-projected onto the span
    of ``A`` (giving ``z``), rescaled to the cube boundary along its ray
    (pivot ``z' = z / max_i |z_i|``), and pushed outward from the pivot
    by the distance between the pivot and the clamped point:

        image = z' + ||clamped - z'|| * z' / ||z'||

    The image is collinear with ``z``, and its distance from the pivot
    equals the clamped point's.  Points whose clamped images coincide
    warp to the same image.

    Parameters
    ----------
    ys : array-like, shape (n, d)

    Returns
    -------
    ndarray, shape (n, D)

    Warns
    -----
    DegeneratePivotWarning
        When ``z`` has vanishing norm (measure-zero event); those rows
        fall back to ``z`` itself.
    """
    ys = np.asarray(ys, dtype=float)
    if ys.ndim != 2 or ys.shape[1] != e.d:
        raise ValueError(f"expected shape (n, {e.d}), got {ys.shape}")
    images = ys @ e.A.T
    outside = ~np.all(np.abs(images) <= 1.0 + MEMBERSHIP_TOL, axis=1)
    if np.any(outside):
        clamped = np.clip(images[outside], -1.0, 1.0)
        z = clamped @ e.proj
        z_norm = np.linalg.norm(z, axis=1)
        degenerate = z_norm <= PIVOT_TOL
        z_max = np.max(np.abs(z), axis=1)
        z_max[degenerate] = 1.0  # avoid 0/0; rows overwritten below
        pivot = z / z_max[:, None]
        pivot_dist = np.linalg.norm(clamped - pivot, axis=1)
        pivot_norm = np.linalg.norm(pivot, axis=1)
        pivot_norm[degenerate] = 1.0
        warped = pivot * (1.0 + pivot_dist / pivot_norm)[:, None]
        if np.any(degenerate):
            warnings.warn(
                "back-projection of a clamped point has near-zero norm; "
                "returning it unstretched",
                DegeneratePivotWarning,
                stacklevel=2,
            )
            warped[degenerate] = z[degenerate]
        images[outside] = warped
    return images


def gamma_from_matrix(A) -> float:
    """Reciprocal of the smallest absolute row sum of ``A``.

    With half-width ``gamma = 1 / min_j sum_i |A_ji|``, the box
    ``[-gamma, gamma]^d`` pushed through ``A`` attains both -1 and +1 in
    every ambient coordinate: the extreme of coordinate ``j`` over the
    box is ``gamma * sum_i |A_ji| >= 1``.

    Raises
    ------
    ValueError
        If some row of ``A`` is zero; that coordinate can never be
        spanned and the bound is undefined.
    """
    A = np.asarray(A, dtype=float)
    row_sums = np.abs(A).sum(axis=1)
    if np.any(row_sums == 0.0):
        zero_rows = np.flatnonzero(row_sums == 0.0)
        raise ValueError(
            f"gamma bound undefined: rows {zero_rows.tolist()} of A are zero, "
            "those coordinates can never span [-1, 1]"
        )
    return float(1.0 / row_sums.min())


def gamma_bound(e: Embedding) -> float:
    """Checked accessor for the embedding's cached spanning half-width.

    Raises
    ------
    ValueError
        If some row of ``A`` is zero (cached bound is NaN).
    """
    if not np.isfinite(e.gamma):
        return gamma_from_matrix(e.A)  # raises with the zero-row diagnostic
    return e.gamma
