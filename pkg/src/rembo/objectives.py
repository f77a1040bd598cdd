"""Synthetic test functions with known low effective dimensionality.

The six-dimensional Hartmann function serves as the core.  It is
embedded into a D-dimensional ambient cube by picking a random subset of
six coordinate axes: the embedded function reads only those coordinates,
so perturbing any other coordinate leaves the value bit-identical.  The
global minimum and its location are therefore known exactly, which is
what optimality-gap reporting needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)
for _m in (_H6_ALPHA, _H6_A, _H6_P):
    _m.setflags(write=False)

# Global minimum of the core, refined numerically from the commonly
# published optimum (0.20169, 0.150011, 0.476874, 0.275332, 0.311652,
# 0.6573) and frozen here.
HARTMANN6_ARGMIN = (
    0.20168950909365746,
    0.15001069354111374,
    0.4768739729250998,
    0.2753324275220782,
    0.3116516172395686,
    0.6573005345536702,
)
HARTMANN6_MIN = -3.3223680114155147

_GAP_TOL = 1e-9


def hartmann6(u) -> np.ndarray | float:
    """Standard four-term exponential-sum Hartmann function on [0, 1]^6.

    Accepts a single point of length 6 or a stack shaped (..., 6) and
    evaluates vectorized.  Inputs outside the unit cube are rejected:
    callers embedding it into a larger domain must map into [0, 1]^6
    first.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 6:
        raise ValueError(f"expected trailing dimension 6, got shape {u.shape}")
    if np.any(u < -1e-12) or np.any(u > 1.0 + 1e-12):
        raise ValueError("input outside [0, 1]^6")
    diff = u[..., None, :] - _H6_P  # (..., 4, 6)
    inner = np.einsum("...ij,ij->...i", diff * diff, _H6_A)
    value = -np.sum(_H6_ALPHA * np.exp(-inner), axis=-1)
    return value if value.ndim else float(value)


_CORES = {
    "hartmann6": {
        "fn": hartmann6,
        "dim": 6,
        "argmin": np.array(HARTMANN6_ARGMIN),
        "min": HARTMANN6_MIN,
    }
}


@dataclass(frozen=True)
class ObjectiveInstance:
    """A D-dimensional objective that only reads ``d_e`` coordinate axes.

    Evaluation at ``x`` in [-1, 1]^D maps the selected axes to the
    core's unit-cube domain via ``u = (x + 1) / 2`` and ignores every
    other coordinate.  ``f_min`` is attained by any point whose selected
    axes equal ``2 * x_min_core - 1``.
    """

    core: str
    D: int
    d_e: int
    axes: tuple[int, ...]
    axes_seed: int
    f_min: float
    x_min_core: tuple[float, ...] = field(repr=False)

    def __call__(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        u = (x[..., list(self.axes)] + 1.0) / 2.0
        return _CORES[self.core]["fn"](u)

    def lifted_argmin(self) -> np.ndarray:
        """One ambient minimizer: core argmin on the axes, zero elsewhere."""
        x = np.zeros(self.D)
        x[list(self.axes)] = 2.0 * np.asarray(self.x_min_core) - 1.0
        return x

    def to_dict(self) -> dict:
        return {"core": self.core, "D": self.D, "axes": list(self.axes),
                "seed": self.axes_seed}

    @classmethod
    def from_dict(cls, doc: dict) -> "ObjectiveInstance":
        inst = embed_objective(doc["core"], doc["D"], doc["seed"])
        if list(inst.axes) != list(doc["axes"]):
            raise ValueError("axes in document do not match their seed")
        return inst


def embed_objective(core: str, D: int, axes_seed: int) -> ObjectiveInstance:
    """Embed a low-dimensional core into D ambient dimensions.

    The effective subspace is a seeded random subset of coordinate axes;
    axis order matters (axis k feeds core argument k), so it is recorded
    as drawn.
    """
    if core not in _CORES:
        raise ValueError(f"unknown core {core!r}; available: {sorted(_CORES)}")
    info = _CORES[core]
    d_e = info["dim"]
    if D < d_e:
        raise ValueError(f"need D >= {d_e} for core {core!r}, got D={D}")
    rng = np.random.default_rng(axes_seed)
    axes = tuple(int(i) for i in rng.choice(D, size=d_e, replace=False))
    return ObjectiveInstance(
        core=core,
        D=D,
        d_e=d_e,
        axes=axes,
        axes_seed=axes_seed,
        f_min=info["min"],
        x_min_core=tuple(float(v) for v in info["argmin"]),
    )


def optimality_gap(instance: ObjectiveInstance, best_observed: float) -> float:
    """Best observed value minus the known minimum, clamped at zero.

    A negative gap beyond float tolerance means the recorded ``f_min``
    is wrong, which must not pass silently.
    """
    gap = float(best_observed) - instance.f_min
    if gap < -_GAP_TOL:
        raise ValueError(
            f"best observed {best_observed} undercuts the recorded minimum "
            f"{instance.f_min} by {-gap:.3e}; f_min is wrong"
        )
    return max(gap, 0.0)
