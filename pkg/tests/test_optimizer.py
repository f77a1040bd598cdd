"""Initial designs, the optimization loop, and run-record serialization."""

import json

import numpy as np
import pytest
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from rembo.geometry import embedding_from_matrix, gamma_bound, sample_embedding, warp_batch
from rembo.kernels import DistanceMode, KernelFamily
from rembo.objectives import embed_objective
from rembo.optimizer import (
    DUPLICATE_TOL,
    RunConfig,
    RunRecord,
    Seeds,
    initial_design,
    run,
)


def _config(**kw):
    base = dict(D=8, d=2, budget=24, n_init=20, mode=DistanceMode.WARPED,
                seeds=Seeds(3, 4, 5), ei_budget=500)
    base.update(kw)
    return RunConfig(**base)


def test_design_has_ten_d_points_inside_default_box():
    for mode in DistanceMode:
        cfg = RunConfig(D=25, d=6, budget=60, mode=mode, seeds=Seeds(0, 1, 2))
        e = sample_embedding(25, 6, cfg.seeds.embedding)
        design = initial_design(cfg, e)
        assert design.shape == (60, 6)
        assert np.all(np.abs(design) <= np.sqrt(6))


def test_design_deterministic_in_design_seed():
    cfg = _config(mode=DistanceMode.CLAMPED)
    e = sample_embedding(cfg.D, cfg.d, cfg.seeds.embedding)
    d1 = initial_design(cfg, e)
    d2 = initial_design(cfg, e)
    assert np.array_equal(d1, d2)
    d3 = initial_design(_config(mode=DistanceMode.CLAMPED, seeds=Seeds(3, 99, 5)), e)
    assert not np.array_equal(d1, d3)


def test_design_redraws_until_clamped_images_distinct():
    # a one-column embedding saturates both cube coordinates for |y| >= 1,
    # so a wide box guarantees duplicate images in the raw hypercube draw
    e = embedding_from_matrix(np.array([[1.0], [2.0]]))
    cfg = RunConfig(D=2, d=1, budget=10, n_init=10, mode=DistanceMode.CLAMPED,
                    y_box=10.0, seeds=Seeds(0, 7, 0))
    design = initial_design(cfg, e)
    images = np.clip(design @ e.A.T, -1.0, 1.0)
    gaps = cdist(images, images, metric="chebyshev")[np.triu_indices(10, k=1)]
    assert np.all(gaps > DUPLICATE_TOL)


def test_design_duplicate_elimination_failure_is_loud():
    # with a box this wide the redraw stream essentially never lands in
    # the sliver of y values with distinct images, so the filter must
    # give up with a diagnostic instead of looping forever
    e = embedding_from_matrix(np.array([[1.0], [2.0]]))
    cfg = RunConfig(D=2, d=1, budget=10, n_init=10, mode=DistanceMode.CLAMPED,
                    y_box=1e6, seeds=Seeds(0, 7, 0))
    with pytest.raises(RuntimeError, match="duplicate"):
        initial_design(cfg, e)


def test_design_dedup_can_be_disabled():
    e = embedding_from_matrix(np.array([[1.0], [2.0]]))
    cfg = RunConfig(D=2, d=1, budget=10, n_init=10, mode=DistanceMode.CLAMPED,
                    y_box=10.0, seeds=Seeds(0, 7, 0), dedup_design=False)
    design = initial_design(cfg, e)
    images = np.clip(design @ e.A.T, -1.0, 1.0)
    gaps = cdist(images, images, metric="chebyshev")[np.triu_indices(10, k=1)]
    assert np.any(gaps <= DUPLICATE_TOL)


def test_warped_design_greedy_maximin_beats_random_subsets():
    # greedy selection of 10 from 50 warped candidates should carry a
    # larger minimum pairwise warped distance than random 10-subsets
    e = embedding_from_matrix(np.array([[1.0], [2.0]]))
    wins = 0
    for trial in range(100):
        cfg = RunConfig(D=2, d=1, budget=10, n_init=10, mode=DistanceMode.WARPED,
                        seeds=Seeds(0, trial, 0))
        design = initial_design(cfg, e)
        sel_min = _min_pairwise(warp_batch(e, design))
        pool = -1.0 + qmc.LatinHypercube(d=1, seed=trial).random(50) * 2.0
        warped_pool = warp_batch(e, pool)
        rng = np.random.default_rng(trial)
        rand_best = max(
            _min_pairwise(warped_pool[rng.choice(50, size=10, replace=False)])
            for _ in range(100)
        )
        if sel_min >= rand_best:
            wins += 1
    assert wins >= 95, f"greedy maximin beat random subsets in only {wins}/100 trials"


def _min_pairwise(points):
    dm = cdist(points, points)
    return float(np.min(dm[np.triu_indices(len(points), k=1)]))


def test_run_with_budget_equal_to_design_is_pure_design():
    obj = embed_objective("hartmann6", D=8, axes_seed=0)
    rec = run(_config(budget=20), obj)
    assert rec.status == "ok" and rec.error is None
    assert rec.n_evals == 20
    assert rec.hyperparameters == ()
    assert rec.best[-1] == np.min(rec.values)
    np.testing.assert_allclose(rec.gap, np.min(rec.values) - obj.f_min, atol=1e-12)


def test_run_is_deterministic_modulo_wall_time():
    obj = embed_objective("hartmann6", D=8, axes_seed=0)
    a = run(_config(), obj).to_dict()
    b = run(_config(), obj).to_dict()
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b


def test_run_trace_invariants():
    obj = embed_objective("hartmann6", D=8, axes_seed=1)
    cfg = _config(mode=DistanceMode.CLAMPED, family=KernelFamily.SQUARED_EXPONENTIAL)
    rec = run(cfg, obj)
    assert rec.n_evals == cfg.budget
    assert np.all(np.diff(rec.best) <= 0.0)
    assert np.all(np.abs(rec.xs) <= 1.0)
    assert np.all(np.isfinite(rec.values))
    assert rec.gap >= 0.0
    assert len(rec.hyperparameters) == cfg.budget - cfg.n_init
    for h in rec.hyperparameters:
        assert h["mode"] == "kX" and h["family"] == "se"
        assert h["variance"] > 0 and h["lengthscale"] > 0
    # the best-so-far curve matches a running minimum of the raw values
    np.testing.assert_array_equal(rec.best, np.minimum.accumulate(rec.values))


def test_run_resolves_symbolic_y_box():
    obj = embed_objective("hartmann6", D=8, axes_seed=0)
    rec_sqrt = run(_config(budget=20, y_box="sqrt_d"), obj)
    assert rec_sqrt.y_box_resolved == pytest.approx(np.sqrt(2))
    rec_gamma = run(_config(budget=20, y_box="gamma"), obj)
    e = sample_embedding(8, 2, 3)
    assert rec_gamma.y_box_resolved == pytest.approx(gamma_bound(e))
    assert np.all(np.abs(rec_gamma.ys) <= rec_gamma.y_box_resolved + 1e-12)


def test_run_truncates_with_error_status_on_fit_failure(monkeypatch):
    from scipy.linalg import LinAlgError

    import rembo.optimizer as mod

    def broken_fit(*a, **kw):
        raise LinAlgError("synthetic failure")

    monkeypatch.setattr(mod, "fit", broken_fit)
    obj = embed_objective("hartmann6", D=8, axes_seed=0)
    rec = run(_config(), obj)
    assert rec.status == "error"
    assert "synthetic failure" in rec.error
    assert rec.n_evals == 20  # the design survived
    assert rec.gap >= 0.0


def test_record_json_round_trip():
    obj = embed_objective("hartmann6", D=8, axes_seed=0)
    rec = run(_config(budget=22), obj)
    blob = json.dumps(rec.to_dict())
    back = RunRecord.from_dict(json.loads(blob))
    assert back.config == rec.config
    np.testing.assert_array_equal(back.ys, rec.ys)
    np.testing.assert_array_equal(back.xs, rec.xs)
    np.testing.assert_array_equal(back.values, rec.values)
    np.testing.assert_array_equal(back.best, rec.best)
    assert back.hyperparameters == rec.hyperparameters
    assert back.gap == rec.gap and back.status == rec.status


def test_record_csv_rows_round_trip(tmp_path):
    import csv

    obj = embed_objective("hartmann6", D=8, axes_seed=0)
    rec = run(_config(budget=21), obj)
    path = tmp_path / "trace.csv"
    rec.write_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == (["iteration"] + [f"y_{j}" for j in range(2)]
                       + [f"x_{j}" for j in range(8)] + ["value", "best_so_far"])
    assert len(rows) == 1 + rec.n_evals
    got_values = np.array([float(r[-2]) for r in rows[1:]])
    np.testing.assert_array_equal(got_values, rec.values)  # repr() keeps full precision


def test_config_defaults_validation_and_round_trip():
    cfg = RunConfig(D=25, d=6, budget=250, seeds=Seeds(1, 2, 3))
    assert cfg.n_init == 60 and cfg.ei_budget == 12000
    assert cfg.y_box == "sqrt_d"
    back = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg
    coerced = RunConfig(D=4, d=2, budget=30, family="se", mode="kY", seeds=Seeds(0, 0, 0))
    assert coerced.family is KernelFamily.SQUARED_EXPONENTIAL
    assert coerced.mode is DistanceMode.LOW_DIM
    with pytest.raises(ValueError):
        RunConfig(D=4, d=2, budget=10, n_init=20, seeds=Seeds(0, 0, 0))
    with pytest.raises(ValueError):
        RunConfig(D=4, d=2, budget=10, n_init=1, seeds=Seeds(0, 0, 0))
    with pytest.raises(ValueError):
        RunConfig(D=4, d=2, budget=10, y_box="banana", seeds=Seeds(0, 0, 0))
    with pytest.raises(ValueError):
        RunConfig(D=2, d=4, budget=10, seeds=Seeds(0, 0, 0))
    with pytest.raises(ValueError):
        run(RunConfig(D=9, d=2, budget=20, seeds=Seeds(0, 0, 0)),
            embed_objective("hartmann6", D=8, axes_seed=0))
