import math

import numba
import numpy as np
import pytest
from scipy import stats

from levy_shc import catalogue as cat
from levy_shc.rng import RngStream, init_state
from levy_shc.sampling import (nested_sups, positive_stable, sample_increment, sample_increments,
                               sample_path_skeleton, sample_sup_1d)
from levy_shc.validation import catalogue_specs

SQRT_PI = math.sqrt(math.pi)


def ecf_z(x, spec, xi):
    c = np.cos(xi * x)
    return (c.mean() - math.exp(-cat.truncated_psi_1d(spec, xi))) / (c.std() / math.sqrt(x.size))


def test_brownian_coordinate_variance():
    x = sample_increments(cat.brownian(2), 0.5, 1_000_000, 1, 1)
    se = math.sqrt(2 / x.shape[0])  # var of a sample variance at unit variance
    assert np.all(np.abs(x.var(axis=0) - 1.0) < 3 * se)


def test_stable_ecf_at_one():
    x = sample_increments(cat.stable(1.5, 1), 1.0, 1_000_000, 1, 2)[:, 0]
    c = np.cos(x)
    assert abs(c.mean() - math.exp(-1)) < 3 * c.std() / math.sqrt(x.size)


@pytest.mark.parametrize("spec", catalogue_specs(1), ids=lambda s: f"{s.kind}-{s.alpha}")
def test_ecf_every_catalogue_spec(spec):
    x = sample_increments(spec, 1.0, 1_000_000, 5, 17, jump_budget=16)[:, 0]
    for xi in (0.5, 1.0, 2.0):
        assert abs(ecf_z(x, spec, xi)) < 3


@pytest.mark.parametrize("m", [20.0, 100.0])
def test_heavily_tempered_relativistic_ecf(m):
    spec = cat.LevyProcessSpec("relativistic_stable", alpha=1.5, m=m, dimension=1)
    x = sample_increments(spec, 1.0, 100_000, 5, 18)[:, 0]
    for xi in (0.5, 1.0, 2.0):
        assert abs(ecf_z(x, spec, xi)) < 3


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.7, 1.9])
def test_stable_self_similarity(alpha):
    spec = cat.stable(alpha, 2)
    small = sample_increments(spec, 0.25, 50_000, 3, 1)[:, 0]
    unit = sample_increments(spec, 1.0, 50_000, 3, 2)[:, 0]
    assert stats.ks_2samp(small, 0.25 ** (1 / alpha) * unit).pvalue > 1e-3


@pytest.mark.parametrize("spec", [cat.brownian(2), cat.brownian(3),
                                  cat.LevyProcessSpec("relativistic_stable", alpha=1.5, m=1.0, dimension=2),
                                  cat.truncate(cat.stable(1.5, 2))], ids=lambda s: f"{s.kind}-{s.dimension}")
def test_isotropy_mean_and_covariance(spec):
    x = sample_increments(spec, 1.0, 400_000, 9, 4, jump_budget=16)
    n = x.shape[0]
    assert np.all(np.abs(x.mean(axis=0)) < 3 * x.std(axis=0) / math.sqrt(n))
    for i in range(spec.dimension):
        for j in range(i + 1, spec.dimension):
            prod = x[:, i] * x[:, j]
            assert abs(prod.mean()) < 3 * prod.std() / math.sqrt(n)


def test_stable_radial_isotropy():
    # subordination gives an exactly isotropic law: the angle is uniform
    x = sample_increments(cat.stable(1.3, 2), 1.0, 200_000, 9, 5)
    ang = np.arctan2(x[:, 1], x[:, 0])
    assert stats.kstest(ang, stats.uniform(-np.pi, 2 * np.pi).cdf).pvalue > 1e-3


def test_increments_deterministic_and_worker_independent():
    spec = cat.stable(1.5, 2)
    a = sample_increments(spec, 0.1, 10_000, 4, 6, workers=1)
    b = sample_increments(spec, 0.1, 10_000, 4, 6, workers=1)
    c = sample_increments(spec, 0.1, 10_000, 4, 6, workers=3)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert not np.array_equal(a, sample_increments(spec, 0.1, 10_000, 5, 6))


def test_sample_increment_matches_stream():
    spec = cat.stable(1.5, 2)
    x = sample_increment(spec, 0.3, RngStream(2, 9))
    y = sample_increment(spec, 0.3, RngStream(2, 9))
    assert x.shape == (2,) and np.array_equal(x, y)
    with pytest.raises(ValueError):
        sample_increment(spec, 0.0, RngStream(2, 9))


def test_skeleton_single_step_is_one_increment():
    spec = cat.stable(1.5, 2)
    start = np.array([0.3, -0.1])
    path = sample_path_skeleton(spec, start, 0.7, 1, RngStream(4, 4))
    inc = sample_increment(spec, 0.7, RngStream(4, 4))
    assert path.positions.shape == (2, 2)
    assert np.array_equal(path.positions[0], start)
    assert np.allclose(path.positions[1], start + inc, rtol=0, atol=1e-15)


def test_brownian_skeleton_final_variance():
    n = 20_000
    ends = np.array([sample_path_skeleton(cat.brownian(1), [0.0], 1.0, 1000, RngStream(5, i)).positions[-1, 0]
                     for i in range(n)])
    assert abs(ends.var() - 2.0) < 3 * 2.0 * math.sqrt(2 / n)


def test_stable_skeleton_end_matches_single_increment():
    spec = cat.stable(1.5, 1)
    ends = np.array([sample_path_skeleton(spec, [0.0], 1.0, 1000, RngStream(6, i)).positions[-1, 0]
                     for i in range(5000)])
    single = sample_increments(spec, 1.0, 100_000, 6, 123)[:, 0]
    assert stats.ks_2samp(ends, single).pvalue > 1e-3


def test_skeleton_rejects_zero_steps():
    with pytest.raises(ValueError):
        sample_path_skeleton(cat.brownian(1), [0.0], 1.0, 0, RngStream(0, 0))


@pytest.mark.parametrize("spec", [cat.brownian(1), cat.stable(1.5, 1), cat.truncate(cat.stable(1.5, 1))],
                         ids=lambda s: s.kind)
def test_single_step_sup_is_positive_part(spec):
    for i in range(20):
        s = sample_sup_1d(spec, 1.0, 1, RngStream(7, i))
        inc = sample_increment(spec, 1.0, RngStream(7, i))[0]
        assert s == max(0.0, inc)


def test_sup_needs_one_dimension():
    with pytest.raises(ValueError):
        sample_sup_1d(cat.brownian(2), 1.0, 10, RngStream(0, 0))


@pytest.mark.parametrize("spec", [cat.brownian(1), cat.stable(1.5, 1), cat.stable(1.1, 1)], ids=lambda s: s.alpha)
def test_nested_grid_sup_never_decreases(spec):
    s = nested_sups(spec, 1.0, 4096, [256, 64, 16, 4, 1], 5000, 8, 1)
    assert np.all(np.diff(s, axis=1) >= 0)


def test_brownian_grid_sup_approaches_limit_from_below():
    s = nested_sups(cat.brownian(1), 1.0, 4096, [64, 16, 4, 1], 40_000, 8, 2)
    means = s.mean(axis=0)
    se = s[:, -1].std() / math.sqrt(s.shape[0])
    assert np.all(np.diff(means) > 0)
    assert means[-1] < 2 / SQRT_PI + 3 * se
    # the grid deficit shrinks like n^(-1/2): 4096 steps leave about 0.5826 * sqrt(2 / 4096)
    assert abs(means[-1] - 2 / SQRT_PI) < abs(means[0] - 2 / SQRT_PI) / 4


def test_stable_sup_tail_slope():
    s = nested_sups(cat.stable(1.5, 1), 1.0, 256, [1], 400_000, 8, 3)[:, 0]
    u = np.array([5.0, 10.0, 20.0, 50.0])
    p = np.array([np.mean(s > v) for v in u])
    slope = np.polyfit(np.log(u), np.log(p), 1)[0]
    assert slope == pytest.approx(-1.5, abs=0.15)


@numba.njit(cache=True)
def _laplace_of_positive_stable(rho, n, state):
    acc = 0.0
    for _ in range(n):
        acc += np.exp(-positive_stable(rho, state))
    return acc / n


@pytest.mark.parametrize("rho", [0.55, 0.75, 0.95])
def test_positive_stable_laplace_transform(rho):
    # normalised so that E[exp(-lam S)] = exp(-lam^rho); at lam = 1 this is 1/e
    state = np.zeros(6, dtype=np.uint64)
    init_state(state, np.uint64(12345))
    n = 400_000
    m = _laplace_of_positive_stable(rho, n, state)
    assert abs(m - math.exp(-1)) < 3 * 0.5 / math.sqrt(n)
