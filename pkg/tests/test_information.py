import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mesoxor.information import (ChannelMatrix, InputDistribution, asymptotic_flip_probabilities,
                                 binary_entropy, capacity, channel_from_gaussian, entropy,
                                 flip_probabilities, mutual_information,
                                 mutual_information_reduced, noise_decomposition,
                                 symmetric_flip_channel)
from mesoxor.physics import PhysicalConstants

C = PhysicalConstants()
prob = st.floats(0, 1)


def _random_channel(r):
    W = r.dirichlet(np.ones(3), size=4)
    return ChannelMatrix(W)


def test_channel_validation():
    with pytest.raises(ValueError):
        ChannelMatrix(np.ones((4, 3)))
    with pytest.raises(ValueError):
        ChannelMatrix(np.ones((3, 3)) / 3)
    with pytest.raises(ValueError):
        InputDistribution(np.array([0.5, 0.6, -0.1, 0.0]))


def test_entropy_basics():
    assert entropy([0.25] * 4) == pytest.approx(2.0)
    assert entropy([1.0, 0.0]) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.11) == pytest.approx(0.4999159, abs=1e-6)


def test_mi_examples():
    ideal = symmetric_flip_channel(0.0)
    assert mutual_information(ideal, InputDistribution.uniform()) == pytest.approx(1.0)
    assert mutual_information(ideal, InputDistribution.factorized(1.0, 1.0)) == 0.0
    noisy = symmetric_flip_channel(0.1)
    assert mutual_information(noisy, InputDistribution.uniform()) == \
        pytest.approx(1 - binary_entropy(0.1), abs=1e-12)
    # full erasure carries nothing
    assert mutual_information(symmetric_flip_channel(0.0, 1.0),
                              InputDistribution.uniform()) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0, 0.5), st.floats(0, 0.4), prob, prob)
@settings(max_examples=300)
def test_reduced_form_equals_direct(flip, erase, pa, pb):
    if flip + erase > 1:
        return
    W = symmetric_flip_channel(flip, erase)
    direct = mutual_information(W, InputDistribution.factorized(pa, pb))
    assert mutual_information_reduced(W, pa, pb) == pytest.approx(direct, abs=1e-12)


def test_reduced_form_needs_symmetry(rng):
    with pytest.raises(ValueError):
        mutual_information_reduced(_random_channel(rng), 0.5, 0.5)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50)
def test_noise_decomposition(seed):
    r = np.random.default_rng(seed)
    W = _random_channel(r)
    q = InputDistribution(r.dirichlet(np.ones(4)))
    d = noise_decomposition(W, q)
    assert d.omega == pytest.approx(d.i_out - d.noise, abs=1e-12)
    assert d.omega == pytest.approx(mutual_information(W, q), abs=1e-12)
    assert d.omega <= min(d.i_in, d.i_out) + 1e-12


def test_flip_probabilities_vs_normal_tails():
    vd, c, a = 4 * C.thermal_voltage, 1.62e-16, 0.2
    f = flip_probabilities(vd, c, a, C.beta)
    s = math.sqrt(C.kT / c)
    assert f.sigma == pytest.approx(s)
    assert f.zeta == pytest.approx(stats.norm.sf(a * vd / s), rel=1e-12)
    assert f.xi == pytest.approx(stats.norm.sf((1 - a) * vd / s), rel=1e-12)
    assert f.erase_low == pytest.approx(stats.norm.cdf((1 - a) * vd / s)
                                        - stats.norm.cdf(a * vd / s), rel=1e-9)
    assert f.log_xi == pytest.approx(stats.norm.logsf((1 - a) * vd / s), rel=1e-12)


def test_flip_probabilities_examples():
    # noiseless limit and the small-supply limit
    f = flip_probabilities(15 * C.thermal_voltage, 1e-12, 0.2, C.beta)
    assert f.xi == 0.0 and f.zeta == 0.0
    g = flip_probabilities(0.0, 1.62e-16, 0.2, C.beta)
    assert g.zeta == 0.5 and g.xi == 0.5
    with pytest.raises(ValueError):
        flip_probabilities(1.0, 1e-16, 0.5, C.beta)


@given(st.floats(0.5, 30))
def test_error_decreases_with_supply(vd):
    vt = C.thermal_voltage
    e1 = flip_probabilities(vd * vt, 1e-17, 0.2, C.beta).error
    e2 = flip_probabilities(1.05 * vd * vt, 1e-17, 0.2, C.beta).error
    assert e2 <= e1


def test_asymptotic_forms():
    vt = C.thermal_voltage
    a = asymptotic_flip_probabilities(15 * vt, 1.62e-16, 0.2, C.beta)
    assert a.xi_complement == pytest.approx(1.0 - a.xi)
    assert a.exponent_zeta == pytest.approx(-C.beta * 1.62e-16 * (0.2 * 15 * vt) ** 2)
    # the asymptotic exponent omits the 1/2 of the exact tail: ratio of logs tends to 2
    ex = flip_probabilities(40 * vt, 1.62e-16, 0.2, C.beta)
    big = asymptotic_flip_probabilities(40 * vt, 1.62e-16, 0.2, C.beta)
    assert big.log_zeta / ex.log_zeta == pytest.approx(2.0, rel=0.01)


def test_gaussian_channel_structure():
    W = channel_from_gaussian(4 * C.thermal_voltage, 1e-17, 0.2, C.beta).p
    np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-15)
    np.testing.assert_array_equal(W[0], W[3])
    np.testing.assert_array_equal(W[1], W[2])
    assert W[0, 0] > 0.5 and W[1, 1] > 0.5


def _grid_capacity(W, n=201):
    # exhaustive oracle over the XOR-class split (all that a symmetric channel sees)
    best = 0.0
    for w in np.linspace(0, 1, n):
        q = np.array([w / 2, (1 - w) / 2, (1 - w) / 2, w / 2])
        best = max(best, mutual_information(W, q))
    return best


@pytest.mark.parametrize("p", [0.01, 0.05, 0.1])
def test_capacity_binary_symmetric(p):
    W = symmetric_flip_channel(p)
    cap = capacity(W)
    assert cap.bits == pytest.approx(1 - binary_entropy(p), abs=1e-6)
    assert cap.bits == pytest.approx(_grid_capacity(W), abs=1e-6)
    assert cap.factorized_bits == pytest.approx(cap.bits, abs=1e-6)


def test_capacity_bounds(rng):
    for _ in range(5):
        W = _random_channel(rng)
        cap = capacity(W)
        assert cap.bits >= mutual_information(W, InputDistribution.uniform()) - 1e-9
        assert cap.bits >= cap.factorized_bits - 1e-9
        assert cap.bits <= math.log2(3) + 1e-12
        qs = rng.dirichlet(np.ones(4), size=200)
        assert max(mutual_information(W, q) for q in qs) <= cap.bits + 1e-9
