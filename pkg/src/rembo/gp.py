"""Gaussian-process conditioning (kriging) and maximum-likelihood
hyperparameter estimation over any kernel spec / embedding pair.

The prior mean is zero; observations are centered by their sample mean
before conditioning and the offset re-added at prediction, so objectives
with a nonzero level do not fight the zero-mean assumption.  All solves
go through a lower-triangular Cholesky factor: no explicit inverses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from rembo.geometry import Embedding
from rembo.kernels import (
    DEFAULT_NUGGET_REL,
    KernelSpec,
    correlation,
    covariance_from_distances,
    distance_matrix,
    effective_images,
)

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)

# nugget escalation ladder, relative to the process variance
_ESCALATION_REL = (1e-6, 1e-4)


@dataclass(frozen=True)
class Dataset:
    """Design points in the low-dimensional domain and their observations."""

    ys: np.ndarray  # (n, d)
    zs: np.ndarray  # (n,)

    def __post_init__(self):
        ys = np.atleast_2d(np.asarray(self.ys, dtype=float)).copy()
        zs = np.asarray(self.zs, dtype=float).ravel().copy()
        if ys.shape[0] != zs.shape[0]:
            raise ValueError(f"{ys.shape[0]} points but {zs.shape[0]} observations")
        if ys.shape[0] < 1:
            raise ValueError("need at least one observation")
        if not (np.all(np.isfinite(ys)) and np.all(np.isfinite(zs))):
            raise ValueError("design points and observations must be finite")
        ys.setflags(write=False)
        zs.setflags(write=False)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "zs", zs)

    @property
    def n(self) -> int:
        return self.ys.shape[0]


@dataclass(frozen=True)
class GpModel:
    """An immutable fitted surrogate.

    ``chol`` is the lower Cholesky factor of the training covariance and
    ``alpha`` solves K alpha = (zs - offset), so prediction is a dot
    product plus one triangular solve.  ``train_images`` caches the
    mode-mapped design points.
    """

    data: Dataset
    spec: KernelSpec
    embedding: Embedding
    chol: np.ndarray
    alpha: np.ndarray
    nugget: float
    offset: float
    train_images: np.ndarray
    log_likelihood: float

    def summary(self) -> dict:
        """Hyperparameters, likelihood and nugget actually used, for run logs."""
        return {
            "family": self.spec.family.value,
            "mode": self.spec.mode.value,
            "variance": self.spec.variance,
            "lengthscale": self.spec.lengthscale,
            "nugget": self.nugget,
            "offset": self.offset,
            "log_likelihood": self.log_likelihood,
            "n": self.data.n,
        }


def _try_cholesky(k: np.ndarray, scale: float) -> np.ndarray | None:
    """Lower Cholesky factor, or None when K is numerically singular.

    potrf can succeed on an exactly singular matrix when rounding pushes
    a zero pivot slightly positive, so a factor whose smallest pivot is
    negligible against the diagonal ``scale`` is rejected too.
    """
    try:
        factor = cholesky(k, lower=True)
    except LinAlgError:
        return None
    if np.min(np.diag(factor)) ** 2 <= 1e-14 * scale:
        return None
    return factor


def _chol_with_escalation(k_diagless: np.ndarray, variance: float, nugget: float):
    """Factorize K trying the requested nugget, then the escalation ladder.

    Returns (lower factor, nugget used).  ``k_diagless`` carries the
    correct off-diagonal entries and ``variance`` on the diagonal.
    """
    ladder = [nugget] + [r * variance for r in _ESCALATION_REL if r * variance > nugget]
    for i, eta in enumerate(ladder):
        k = k_diagless.copy()
        np.fill_diagonal(k, variance + eta)
        factor = _try_cholesky(k, variance + eta)
        if factor is None:
            continue
        if i > 0:
            logger.warning(
                "covariance factorization needed nugget escalation to %.1e "
                "(requested %.1e)", eta, nugget,
            )
        return factor, eta
    raise LinAlgError(
        f"covariance matrix not factorizable even with nugget "
        f"{ladder[-1]:.1e}; design is too degenerate (duplicate or "
        f"near-duplicate images dominate)"
    )


def build_model(
    data: Dataset,
    spec: KernelSpec,
    e: Embedding,
    nugget: float | None = None,
    offset: float = 0.0,
) -> GpModel:
    """Condition a GP with fixed hyperparameters on the data.

    ``nugget=None`` uses the default ``1e-8 * variance``.  On
    factorization failure the nugget escalates through ``1e-6`` and
    ``1e-4`` times the variance (with a logged warning) before giving
    up.
    """
    if nugget is None:
        nugget = DEFAULT_NUGGET_REL * spec.variance
    r = distance_matrix(spec, e, data.ys)
    k = covariance_from_distances(spec, r, 0.0)
    factor, eta = _chol_with_escalation(k, spec.variance, nugget)
    zc = data.zs - offset
    v = solve_triangular(factor, zc, lower=True)
    alpha = solve_triangular(factor.T, v, lower=False)
    ll = float(-0.5 * (v @ v) - np.sum(np.log(np.diag(factor))) - 0.5 * data.n * _LOG_2PI)
    factor.setflags(write=False)
    alpha.setflags(write=False)
    images = np.ascontiguousarray(effective_images(spec.mode, e, data.ys))
    images.setflags(write=False)
    return GpModel(
        data=data,
        spec=spec,
        embedding=e,
        chol=factor,
        alpha=alpha,
        nugget=eta,
        offset=offset,
        train_images=images,
        log_likelihood=ll,
    )


def log_marginal_likelihood(
    data: Dataset,
    spec: KernelSpec,
    e: Embedding,
    nugget: float | None = None,
    offset: float = 0.0,
) -> float:
    """Gaussian log density of the (centered) observations under the spec.

    Computed through the triangular factor; returns ``-inf`` when the
    covariance is not positive definite, so hyperparameter search simply
    rejects the candidate.
    """
    if nugget is None:
        nugget = DEFAULT_NUGGET_REL * spec.variance
    r = distance_matrix(spec, e, data.ys)
    return _lml_from_distances(r, data.zs - offset, spec, nugget)


def _lml_from_distances(r: np.ndarray, zc: np.ndarray, spec: KernelSpec, nugget: float) -> float:
    k = covariance_from_distances(spec, r, nugget)
    factor = _try_cholesky(k, spec.variance + nugget)
    if factor is None:
        return -np.inf
    v = solve_triangular(factor, zc, lower=True)
    return float(-0.5 * (v @ v) - np.sum(np.log(np.diag(factor))) - 0.5 * len(zc) * _LOG_2PI)


def fit(
    data: Dataset,
    spec_template: KernelSpec,
    e: Embedding,
    n_starts: int = 10,
    max_evals_per_start: int = 200,
    seed: int = 0,
    nugget_rel: float = DEFAULT_NUGGET_REL,
) -> GpModel:
    """Maximum-likelihood fit of (variance, lengthscale) for the template.

    Multi-start bounded search on log-parameters: one start at the
    moment heuristic (sample variance, median pairwise effective
    distance), the rest Latin-hypercube over lengthscale in
    ``[1e-2, 10] * median`` and variance in ``[1e-3, 1e3] * sample
    variance``, each polished by derivative-free simplex search capped
    at ``max_evals_per_start`` likelihood evaluations.  The returned
    likelihood is at least the likelihood at every start point.
    """
    if data.n < 2:
        raise ValueError(f"maximum-likelihood fit needs n >= 2, got n={data.n}")
    offset = float(np.mean(data.zs))
    zc = data.zs - offset

    r = distance_matrix(spec_template, e, data.ys)
    off_diag = r[np.triu_indices(data.n, k=1)]
    med = float(np.median(off_diag))
    if not med > 0.0:
        med = 1.0  # all images coincide; lengthscale is then immaterial
    s2 = float(np.var(data.zs, ddof=1))
    if not s2 > 0.0:
        s2 = 1e-12  # constant observations

    lo = np.log([1e-3 * s2, 1e-2 * med])
    hi = np.log([1e3 * s2, 10.0 * med])
    starts = [np.log([s2, med])]
    if n_starts > 1:
        lhs = qmc.LatinHypercube(d=2, seed=seed).random(n_starts - 1)
        starts.extend(lo + lhs * (hi - lo))

    def neg_lml(theta):
        variance, lengthscale = np.exp(theta)
        cand = spec_template.with_hyperparameters(variance, lengthscale)
        return -_lml_from_distances(r, zc, cand, nugget_rel * variance)

    best_theta, best_val = None, np.inf
    for theta0 in starts:
        val0 = neg_lml(theta0)
        if val0 < best_val:
            best_theta, best_val = theta0, val0
        res = minimize(
            neg_lml,
            theta0,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"maxfev": max_evals_per_start, "xatol": 1e-3, "fatol": 1e-7},
        )
        if res.fun < best_val:
            best_theta, best_val = res.x, res.fun
    if not np.isfinite(best_val):
        raise LinAlgError("likelihood not finite at any candidate; data degenerate")

    variance, lengthscale = np.exp(best_theta)
    fitted = spec_template.with_hyperparameters(float(variance), float(lengthscale))
    return build_model(data, fitted, e, nugget=nugget_rel * variance, offset=offset)


def predict_batch(model: GpModel, ys) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation at a stack of points (m, d)."""
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    images = effective_images(model.spec.mode, model.embedding, ys)
    rq = cdist(images, model.train_images)
    kq = model.spec.variance * np.asarray(correlation(model.spec, rq))
    mean = model.offset + kq @ model.alpha
    v = solve_triangular(model.chol, kq.T, lower=True)
    var_post = model.spec.variance - np.einsum("ij,ij->j", v, v)
    sd = np.sqrt(np.clip(var_post, 0.0, None))
    return mean, sd


def predict(model: GpModel, y) -> tuple[float, float]:
    """Posterior mean and standard deviation at a single point."""
    mean, sd = predict_batch(model, np.asarray(y, dtype=float)[None, :])
    return float(mean[0]), float(sd[0])
