import numpy as np
import pytest

from mesoxor.ga import FitnessCache, GaConfig, decode, run_ga


def test_decode_grid():
    bounds = [(4.0, 6.0), (0.0, 1.0)]
    bits = np.array([0] * 10 + [1] * 10)
    np.testing.assert_allclose(decode(bits, bounds, 10), [4.0, 1.0])
    msb = np.array([1] + [0] * 9 + [0] * 9 + [1])
    np.testing.assert_allclose(decode(msb, bounds, 10), [4.0 + 2 * 512 / 1023, 1 / 1023])


def test_config_defaults_and_validation():
    c = GaConfig()
    assert (c.gene_length_bits, c.population, c.generations, c.mutation_probability) == \
        (10, 80, 100, 0.001)
    assert c.bounds == ((4.0, 6.0), (0.0, 1.0), (0.0, 1.0))
    for kw in (dict(population=1), dict(mutation_probability=2.0), dict(tournament_size=0),
               dict(elitism=80), dict(vd_bounds_vt=(6.0, 4.0))):
        with pytest.raises(ValueError):
            GaConfig(**kw)


def _sphere(x):
    return -float(((x - np.array([0.3, -0.7, 0.1])) ** 2).sum())


def test_sphere_converges():
    cfg = GaConfig(population=60, generations=80, mutation_probability=0.01, seed=3)
    run = run_ga(_sphere, [(-1, 1)] * 3, cfg)
    # binary coding has Hamming cliffs, so only near-optimality is guaranteed
    np.testing.assert_allclose(run.x, [0.3, -0.7, 0.1], atol=0.08)
    assert run.fitness > -5e-3
    assert run.fitness > run.trace.best[0]
    assert np.all(np.diff(run.trace.best) >= 0)
    assert run.fitness == run.trace.best[-1]
    assert len(run.trace.best) == 80


def test_deterministic_under_seed():
    cfg = GaConfig(population=20, generations=15, seed=9)
    a = run_ga(_sphere, [(-1, 1)] * 3, cfg)
    b = run_ga(_sphere, [(-1, 1)] * 3, cfg)
    np.testing.assert_array_equal(a.trace.best, b.trace.best)
    np.testing.assert_array_equal(a.x, b.x)
    c = run_ga(_sphere, [(-1, 1)] * 3, GaConfig(population=20, generations=15, seed=10))
    assert not np.array_equal(a.trace.mean, c.trace.mean)


def test_cache_counts_distinct_chromosomes():
    calls = []

    def f(x):
        calls.append(tuple(x))
        return _sphere(x)

    cache = FitnessCache(f)
    cfg = GaConfig(population=30, generations=30, seed=1)
    run = run_ga(f, [(-1, 1)] * 3, cfg, cache)
    assert len(calls) == len(cache) == run.evaluations
    assert run.evaluations < 30 * 30


def test_batch_evaluation_matches_serial():
    cfg = GaConfig(population=20, generations=10, seed=4)
    a = run_ga(_sphere, [(-1, 1)] * 3, cfg)
    b = run_ga(_sphere, [(-1, 1)] * 3, cfg, evaluate_many=lambda xs: [_sphere(x) for x in xs])
    np.testing.assert_array_equal(a.trace.best, b.trace.best)
