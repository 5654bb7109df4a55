import numpy as np
import pytest
from scipy import stats

from mesoxor.gillespie import (gaussianity_check, output_stats, sample_trajectory,
                               simulate_ctmc, state_marginals, stream)
from mesoxor.master import build_rate_matrix, integrate, steady_output
from mesoxor.physics import NandParams


def _eq(a, b):
    return all(np.array_equal(getattr(a, f), getattr(b, f)) for f in
               ("times", "from_state", "to_state", "channels", "exit_rates")) and \
        (a.final, a.v_final) == (b.final, b.v_final)


def test_seed_determinism(p15):
    g = p15.with_inputs(0.0, p15.v_d)
    a = sample_trajectory(g, 0, 500 / g.gamma, seed=7)
    b = sample_trajectory(g, 0, 500 / g.gamma, seed=7)
    c = sample_trajectory(g, 0, 500 / g.gamma, seed=8)
    assert _eq(a, b)
    assert not _eq(a, c)
    assert a.n_events > 100


def test_zero_horizon(p15):
    tr = sample_trajectory(p15, 5, 0.0, seed=0)
    assert tr.n_events == 0 and tr.final == 5


def test_streams_are_distinct():
    x = [stream(3, i).random(4) for i in range(3)]
    assert not np.allclose(x[0], x[1]) and not np.allclose(x[1], x[2])
    np.testing.assert_array_equal(stream(3, 1).random(4), x[1])


def test_jump_records_are_consistent(p15):
    g = p15.with_inputs(p15.v_d, 0.0)
    tr = sample_trajectory(g, 0, 300 / g.gamma, seed=1)
    assert tr.from_state[0] == tr.initial
    np.testing.assert_array_equal(tr.from_state[1:], tr.to_state[:-1])
    assert tr.to_state[-1] == tr.final
    assert np.all(np.diff(tr.times) > 0)
    flips = tr.from_state ^ tr.to_state
    # electrode moves flip one bit, island hops exchange two
    nbits = np.array([bin(f).count("1") for f in flips])
    assert np.all((tr.channels < 6) == (nbits == 1))


def test_node_moves_in_single_charges(p15):
    g = p15.with_inputs(0.0, 0.0)
    c = g.c_g / g.constants.charge
    a = sample_trajectory(g, 0, 200 / g.gamma, seed=2)
    steps = (a.v_final - a.v_initial) * c
    assert steps == pytest.approx(round(steps), abs=1e-6)
    f = sample_trajectory(g, 0, 200 / g.gamma, seed=2, frozen=True)
    assert f.v_final == f.v_initial


def test_sojourns_are_exponential(p15):
    # standardized holding times exit_rate * dt are Exp(1) in every state
    g = p15.with_inputs(0.0, p15.v_d)
    tr = sample_trajectory(g, 0, 3e4 / g.gamma, seed=11, frozen=True)
    dt = np.diff(np.concatenate([[0.0], tr.times]))
    z = (tr.exit_rates * dt)[:10_000]
    assert len(z) == 10_000
    d, _ = stats.kstest(z, "expon")
    assert d < 1.63 / np.sqrt(len(z))      # 1% critical value


def test_two_state_occupancy():
    a, b = 2.0, 0.7
    D = np.array([[-a, b], [a, -b]])
    times, states = simulate_ctmc(D, 0, np.inf, seed=5, max_events=100_000)
    t = np.concatenate([[0.0], times])
    occ = np.concatenate([[0], states])
    dwell = np.diff(t)
    frac0 = dwell[occ[:-1] == 0].sum() / dwell.sum()
    # time average of a two-state chain: variance 2ab / ((a+b)^3 T)
    sd = np.sqrt(2 * a * b / ((a + b) ** 3 * dwell.sum()))
    assert abs(frac0 - b / (a + b)) < 3 * sd


def test_ensemble_matches_master_equation(p15):
    prev, nxt = p15.with_inputs(p15.v_d, p15.v_d), p15.with_inputs(0.0, 0.0)
    s0 = steady_output(prev)
    cps = np.array([1.0, 5.0, 20.0]) / p15.gamma
    emp = state_marginals(nxt, s0.distribution, s0.v_out, cps, 3000, seed=4)
    for k, t in enumerate(cps):
        ref = integrate(nxt, s0.distribution, s0.v_out, t).distributions[-1]
        assert 0.5 * np.abs(emp[k] - ref).sum() < 0.04


def test_frozen_ensemble_matches_generator(p15):
    g = p15.with_inputs(0.0, p15.v_d)
    D = build_rate_matrix(g, 0.2).rates
    from scipy.linalg import expm
    p0 = np.eye(16)[3]
    t = 2.0 / g.gamma
    emp = state_marginals(g, p0, 0.2, [t], 4000, seed=9, frozen=True)[0]
    assert 0.5 * np.abs(emp - expm(D * t) @ p0).sum() < 0.04


def test_gaussianity_check_calibration(rng):
    ok = gaussianity_check(output_stats(rng.normal(size=10_000)))
    bad = gaussianity_check(output_stats(rng.exponential(size=10_000)))
    assert ok.passed and not bad.passed
    assert bad.skewness == pytest.approx(2.0, abs=0.3)
    with pytest.raises(ValueError):
        gaussianity_check(output_stats(rng.normal(size=500)))


def test_output_stats_order_insensitive(rng):
    x = rng.normal(size=2001)
    a, b = output_stats(x), output_stats(x[::-1])
    assert (a.mean, a.variance, a.skewness) == (b.mean, b.variance, b.skewness)
    assert a.counts.sum() == 2001
    assert a.standard_error == pytest.approx(np.sqrt(a.variance / 2001))


def test_bad_horizon():
    with pytest.raises(ValueError):
        sample_trajectory(NandParams.at_supply(5.0), 0, -1.0, seed=0)
