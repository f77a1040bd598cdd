import json

import numpy as np
import pytest

from rembo.geometry import embedding_from_matrix, sample_embedding
from rembo.kernels import (
    DistanceMode,
    KernelFamily,
    KernelSpec,
    correlation,
    covariance_matrix,
    distance_matrix,
    effective_distance,
)

# independently evaluated closed forms (see also the spec-level oracles)
SE_AT_SQRT2 = np.exp(-1.0)
MATERN52_AT_L = 0.5239941088318203


def spec(mode=DistanceMode.LOW_DIM, family=KernelFamily.SQUARED_EXPONENTIAL,
         variance=1.0, lengthscale=1.0):
    return KernelSpec(family=family, variance=variance, lengthscale=lengthscale, mode=mode)


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(variance=0.0)
    with pytest.raises(ValueError):
        spec(lengthscale=-1.0)


def test_distance_zero_on_identical_points():
    e = sample_embedding(5, 2, rng_seed=1)
    y = np.array([0.4, -0.2])
    for mode in DistanceMode:
        assert effective_distance(spec(mode), e, y, y) == 0.0


def test_clamped_mode_collapses_saturated_points():
    # A=(1,2)^T: both y=1 and y=2 clamp to the cube vertex (1,1)
    e = embedding_from_matrix(np.array([[1.0], [2.0]]))
    assert effective_distance(spec(DistanceMode.CLAMPED), e, [1.0], [2.0]) == 0.0
    assert effective_distance(spec(DistanceMode.WARPED), e, [1.0], [2.0]) == 0.0
    assert effective_distance(spec(DistanceMode.LOW_DIM), e, [1.0], [2.0]) == 1.0


def test_distance_symmetry_and_triangle():
    e = sample_embedding(8, 3, rng_seed=3)
    rng = np.random.default_rng(0)
    ys = rng.normal(scale=2.0, size=(3, 3))
    for mode in DistanceMode:
        s = spec(mode)
        ab = effective_distance(s, e, ys[0], ys[1])
        ba = effective_distance(s, e, ys[1], ys[0])
        bc = effective_distance(s, e, ys[1], ys[2])
        ac = effective_distance(s, e, ys[0], ys[2])
        assert ab == pytest.approx(ba, abs=1e-12)
        assert ac <= ab + bc + 1e-12


def test_correlation_closed_forms():
    se = spec(family=KernelFamily.SQUARED_EXPONENTIAL, lengthscale=0.7)
    m52 = spec(family=KernelFamily.MATERN52, lengthscale=0.7)
    assert correlation(se, 0.0) == 1.0
    assert correlation(m52, 0.0) == 1.0
    assert correlation(se, 0.7 * np.sqrt(2.0)) == pytest.approx(SE_AT_SQRT2, rel=1e-12)
    assert correlation(m52, 0.7) == pytest.approx(MATERN52_AT_L, rel=1e-12)


def test_correlation_decreasing_to_zero():
    r = np.linspace(0.0, 30.0, 400)
    for family in KernelFamily:
        c = correlation(spec(family=family), r)
        assert np.all(np.diff(c) < 0)
        assert c[-1] < 1e-9
    with pytest.raises(ValueError):
        correlation(spec(), -0.1)


def test_covariance_single_point():
    e = sample_embedding(4, 1, rng_seed=0)
    k = covariance_matrix(spec(variance=2.5), e, [[0.3]], nugget=0.1)
    np.testing.assert_allclose(k, [[2.6]])


def test_covariance_duplicate_images_singular_without_nugget():
    e = embedding_from_matrix(np.array([[1.0], [2.0]]))
    ys = np.array([[1.0], [2.0], [0.1]])  # first two share the clamped image
    k = covariance_matrix(spec(DistanceMode.CLAMPED), e, ys, nugget=0.0)
    assert np.array_equal(k[0], k[1])
    assert np.linalg.matrix_rank(k) < 3
    k_n = covariance_matrix(spec(DistanceMode.CLAMPED), e, ys, nugget=1e-8)
    assert np.linalg.matrix_rank(k_n) == 3


def test_covariance_exact_symmetry_and_psd():
    rng = np.random.default_rng(7)
    for mode in DistanceMode:
        for family in KernelFamily:
            e = sample_embedding(10, 2, rng_seed=int(rng.integers(1 << 30)))
            ys = rng.normal(scale=2.0, size=(20, 2))
            s = spec(mode, family, variance=3.0, lengthscale=0.8)
            k = covariance_matrix(s, e, ys)  # default nugget 1e-8*variance
            assert np.array_equal(k, k.T)
            # independent symmetric eigensolver as the PSD oracle
            assert np.linalg.eigvalsh(k).min() >= -1e-8 * s.variance


def test_psd_after_nugget_many_random_designs():
    rng = np.random.default_rng(11)
    for mode in DistanceMode:
        for _ in range(100):
            e = sample_embedding(6, 2, rng_seed=int(rng.integers(1 << 30)))
            ys = rng.normal(scale=3.0, size=(12, 2))
            k = covariance_matrix(spec(mode, variance=2.0), e, ys)
            assert np.linalg.eigvalsh(k).min() >= -1e-8 * 2.0


def test_modes_agree_when_images_stay_inside_cube():
    # if no point clamps, warped and clamped images are both A y
    e = sample_embedding(7, 2, rng_seed=21)
    scale = 0.5 / np.max(np.abs(e.A).sum(axis=1))
    ys = np.random.default_rng(2).uniform(-scale, scale, size=(15, 2))
    r_clamped = distance_matrix(spec(DistanceMode.CLAMPED), e, ys)
    r_warped = distance_matrix(spec(DistanceMode.WARPED), e, ys)
    assert np.array_equal(r_clamped, r_warped)
    lifted = ys @ e.A.T
    from scipy.spatial.distance import cdist

    np.testing.assert_allclose(r_clamped, cdist(lifted, lifted), atol=1e-12)


def test_kernel_spec_json_round_trip():
    s = spec(DistanceMode.WARPED, KernelFamily.MATERN52, variance=1.5, lengthscale=0.3)
    doc = json.loads(json.dumps(s.to_dict()))
    assert KernelSpec.from_dict(doc) == s
    assert doc == {"family": "matern52", "variance": 1.5, "lengthscale": 0.3, "mode": "kPsi"}
