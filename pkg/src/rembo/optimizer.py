"""The embedded-optimization loop: seeded design, fit, EI, evaluate, repeat.

A run owns one random embedding and spends its budget as an initial
space-filling design followed by one EI-chosen evaluation per iteration,
refitting hyperparameters each time.  The objective only ever sees
clamped ambient points, whatever kernel mode is active.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from rembo.acquisition import maximize_ei
from rembo.geometry import Embedding, convex_project, gamma_bound, sample_embedding, warp_batch
from rembo.gp import Dataset, fit
from rembo.kernels import DEFAULT_NUGGET_REL, DistanceMode, KernelFamily, KernelSpec
from rembo.objectives import ObjectiveInstance, optimality_gap

# sup-norm threshold under which two clamped images count as the same point
DUPLICATE_TOL = 1e-9

# oversampling factor for the warped-design candidate pool
_OVERSAMPLE = 5
_MAX_REDRAW_FACTOR = 100


@dataclass(frozen=True)
class Seeds:
    """Independent seeds for the three stochastic ingredients of a run."""

    embedding: int
    design: int
    acquisition: int

    def to_dict(self) -> dict:
        return {"embedding": self.embedding, "design": self.design,
                "acquisition": self.acquisition}

    @classmethod
    def from_dict(cls, d: dict) -> "Seeds":
        return cls(embedding=int(d["embedding"]), design=int(d["design"]),
                   acquisition=int(d["acquisition"]))


@dataclass(frozen=True)
class RunConfig:
    """Everything a single run needs besides the objective itself.

    ``y_box`` is either a positive half-width or one of the symbolic
    choices ``"sqrt_d"`` (the default) and ``"gamma"`` (the embedding's
    coverage bound, resolved once the embedding is drawn).  ``n_init``
    and ``ei_budget`` default to 10*d and 2000*d.  ``nugget_rel`` is
    relative to the fitted variance.  ``dedup_design`` exists so the
    known duplicate-proposal pathology of the low-dimensional kernel can
    be reproduced; leave it on for real use.
    """

    D: int
    d: int
    budget: int
    family: KernelFamily = KernelFamily.MATERN52
    mode: DistanceMode = DistanceMode.WARPED
    n_init: int | None = None
    y_box: float | str = "sqrt_d"
    seeds: Seeds = field(default_factory=lambda: Seeds(0, 1, 2))
    nugget_rel: float = DEFAULT_NUGGET_REL
    ei_budget: int | None = None
    dedup_design: bool = True

    def __post_init__(self):
        if self.d < 1 or self.D < self.d:
            raise ValueError(f"need D >= d >= 1, got D={self.D}, d={self.d}")
        if self.n_init is None:
            object.__setattr__(self, "n_init", 10 * self.d)
        if self.ei_budget is None:
            object.__setattr__(self, "ei_budget", 2000 * self.d)
        if self.n_init < 1:
            raise ValueError(f"n_init must be >= 1, got {self.n_init}")
        if self.budget < self.n_init:
            raise ValueError(
                f"budget ({self.budget}) must cover the initial design ({self.n_init})"
            )
        if self.budget > self.n_init and self.n_init < 2:
            raise ValueError("EI iterations need an initial design of at least 2 points")
        if self.ei_budget < 1:
            raise ValueError(f"ei_budget must be >= 1, got {self.ei_budget}")
        if self.nugget_rel < 0:
            raise ValueError(f"nugget_rel must be >= 0, got {self.nugget_rel}")
        if isinstance(self.y_box, str):
            if self.y_box not in ("sqrt_d", "gamma"):
                raise ValueError(f"y_box must be positive, 'sqrt_d' or 'gamma', got {self.y_box!r}")
        elif not self.y_box > 0:
            raise ValueError(f"y_box must be positive, got {self.y_box}")
        if not isinstance(self.family, KernelFamily):
            object.__setattr__(self, "family", KernelFamily(self.family))
        if not isinstance(self.mode, DistanceMode):
            object.__setattr__(self, "mode", DistanceMode(self.mode))

    def to_dict(self) -> dict:
        return {
            "D": self.D, "d": self.d, "budget": self.budget,
            "family": self.family.value, "mode": self.mode.value,
            "n_init": self.n_init, "y_box": self.y_box,
            "seeds": self.seeds.to_dict(), "nugget_rel": self.nugget_rel,
            "ei_budget": self.ei_budget, "dedup_design": self.dedup_design,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["family"] = KernelFamily(d.get("family", "matern52"))
        d["mode"] = DistanceMode(d.get("mode", "kPsi"))
        d["seeds"] = Seeds.from_dict(d["seeds"])
        return cls(**d)


@dataclass(frozen=True)
class RunRecord:
    """One run's full trace: every evaluation plus fit diagnostics.

    ``status`` is "ok" when the budget completed; a fit failure leaves a
    truncated trace with status "error" and the message in ``error``.
    """

    config: RunConfig
    y_box_resolved: float
    ys: np.ndarray          # (n_evals, d)
    xs: np.ndarray          # (n_evals, D), always inside [-1, 1]^D
    values: np.ndarray      # (n_evals,)
    best: np.ndarray        # (n_evals,), nonincreasing
    hyperparameters: tuple  # one fit summary per EI iteration
    gap: float
    wall_time_s: float
    status: str = "ok"
    error: str | None = None

    def __post_init__(self):
        for name in ("ys", "xs", "values", "best"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_evals(self) -> int:
        return self.values.shape[0]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "y_box_resolved": self.y_box_resolved,
            "ys": self.ys.tolist(),
            "xs": self.xs.tolist(),
            "values": self.values.tolist(),
            "best": self.best.tolist(),
            "hyperparameters": list(self.hyperparameters),
            "gap": self.gap,
            "wall_time_s": self.wall_time_s,
            "status": self.status,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            config=RunConfig.from_dict(d["config"]),
            y_box_resolved=float(d["y_box_resolved"]),
            ys=np.asarray(d["ys"], dtype=float),
            xs=np.asarray(d["xs"], dtype=float),
            values=np.asarray(d["values"], dtype=float),
            best=np.asarray(d["best"], dtype=float),
            hyperparameters=tuple(d["hyperparameters"]),
            gap=float(d["gap"]),
            wall_time_s=float(d["wall_time_s"]),
            status=d.get("status", "ok"),
            error=d.get("error"),
        )

    def csv_rows(self):
        """Flat rows (iteration, y..., x..., value, best_so_far) plus header."""
        d, D = self.config.d, self.config.D
        header = (["iteration"] + [f"y_{j}" for j in range(d)]
                  + [f"x_{j}" for j in range(D)] + ["value", "best_so_far"])
        rows = [header]
        for i in range(self.n_evals):
            rows.append([i] + [repr(v) for v in self.ys[i]]
                        + [repr(v) for v in self.xs[i]]
                        + [repr(float(self.values[i])), repr(float(self.best[i]))])
        return rows

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.csv_rows())


def _resolve_y_box(config: RunConfig, e: Embedding) -> float:
    if config.y_box == "sqrt_d":
        return float(np.sqrt(config.d))
    if config.y_box == "gamma":
        return gamma_bound(e)
    return float(config.y_box)


def _first_duplicate(images: np.ndarray) -> int | None:
    """Index of the first point whose image repeats an earlier one."""
    m = cdist(images, images, metric="chebyshev")
    n = m.shape[0]
    iu = np.triu_indices(n, k=1)
    hits = np.flatnonzero(m[iu] <= DUPLICATE_TOL)
    if hits.size == 0:
        return None
    return int(iu[1][hits[0]])


def _greedy_maximin(dm: np.ndarray, k: int) -> list[int]:
    """Select k indices greedily maximizing the minimum pairwise distance."""
    n = dm.shape[0]
    if k >= n:
        return list(range(n))
    if k == 1:
        return [0]
    first = int(np.argmax(dm))  # flattened first maximum: lowest-index pair
    if dm.flat[first] <= 0.0:
        return list(range(k))  # all candidates coincide; any subset ties
    selected = [first // n, first % n]
    while len(selected) < k:
        mind = np.min(dm[:, selected], axis=1)
        mind[selected] = -1.0
        selected.append(int(np.argmax(mind)))
    return selected


def initial_design(config: RunConfig, e: Embedding) -> np.ndarray:
    """Space-filling design of n_init points in the box, per kernel mode.

    Low-dim and clamped modes take a Latin hypercube and redraw any point
    whose clamped image duplicates another's (sup-norm 1e-9), failing
    loudly if 100*n_init redraws cannot fix it.  The warped mode takes a
    5x oversampled hypercube and keeps a greedy maximin subset in the
    warped metric, where duplicates lose by construction.
    """
    b = _resolve_y_box(config, e)
    n = config.n_init
    if config.mode is DistanceMode.WARPED:
        pool = -b + qmc.LatinHypercube(d=config.d, seed=config.seeds.design).random(
            _OVERSAMPLE * n) * 2 * b
        warped = warp_batch(e, pool)
        keep = _greedy_maximin(cdist(warped, warped), n)
        return pool[keep]

    ys = -b + qmc.LatinHypercube(d=config.d, seed=config.seeds.design).random(n) * 2 * b
    if not config.dedup_design:
        return ys
    images = convex_project(ys @ e.A.T)
    redraw = np.random.default_rng(config.seeds.design + 1)
    for _ in range(_MAX_REDRAW_FACTOR * n):
        j = _first_duplicate(images)
        if j is None:
            return ys
        ys[j] = redraw.uniform(-b, b, size=config.d)
        images[j] = convex_project(ys[j] @ e.A.T)
    raise RuntimeError(
        "initial design still has duplicate clamped images after "
        f"{_MAX_REDRAW_FACTOR * n} redraws; the embedding maps the box onto "
        "too few distinct points of the hypercube"
    )


def run(config: RunConfig, objective: ObjectiveInstance) -> RunRecord:
    """Execute one full run against the objective and return its trace.

    Spends exactly ``budget`` objective evaluations unless a fit failure
    truncates the run.  Deterministic given the config seeds.
    """
    if objective.D != config.D:
        raise ValueError(f"objective has D={objective.D} but config has D={config.D}")
    t0 = time.perf_counter()
    e = sample_embedding(config.D, config.d, config.seeds.embedding)
    box = _resolve_y_box(config, e)

    ys = list(initial_design(config, e))
    xs = [convex_project(y @ e.A.T) for y in ys]
    values = [float(objective(x)) for x in xs]
    hyperparameters = []
    status, error = "ok", None

    template = KernelSpec(family=config.family, variance=1.0, lengthscale=1.0,
                          mode=config.mode)
    for it in range(config.n_init, config.budget):
        data = Dataset(ys=np.asarray(ys), zs=np.asarray(values))
        try:
            model = fit(data, template, e, seed=config.seeds.acquisition + it,
                        nugget_rel=config.nugget_rel)
        except LinAlgError as exc:
            status, error = "error", f"fit failed at evaluation {it}: {exc}"
            break
        res = maximize_ei(model, box, config.ei_budget, config.seeds.acquisition + it)
        y = res.y_star
        x = convex_project(y @ e.A.T)
        ys.append(np.asarray(y, dtype=float))
        xs.append(x)
        values.append(float(objective(x)))
        hyperparameters.append(model.summary())

    values_arr = np.asarray(values)
    return RunRecord(
        config=config,
        y_box_resolved=box,
        ys=np.asarray(ys),
        xs=np.asarray(xs),
        values=values_arr,
        best=np.minimum.accumulate(values_arr),
        hyperparameters=tuple(hyperparameters),
        gap=optimality_gap(objective, float(np.min(values_arr))),
        wall_time_s=time.perf_counter() - t0,
        status=status,
        error=error,
    )
