import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesoxor.efficiency import (EtaLandscape, ParityParams, ga_optimize, gaussian_channel,
                                information_energy_ratio, parity_conditional, parity_efficiency,
                                parity_energy, parity_mutual_information,
                                parity_transition_matrices)
from mesoxor.errors import NumericalError
from mesoxor.ga import GaConfig
from mesoxor.information import ChannelMatrix, entropy, symmetric_flip_channel
from mesoxor.network import with_supply
from mesoxor.efficiency import _ratio

prob = st.floats(0, 1)


def test_constant_inputs_give_zero(net15, energy15):
    pt = information_energy_ratio(net15, 1.0, 1.0, energy15)
    assert pt.mutual_information == 0.0 and pt.eta == 0.0


def test_eta_definition(net15, energy15):
    pt = information_energy_ratio(net15, 0.5, 0.5, energy15)
    assert pt.eta == pytest.approx(pt.mutual_information / pt.average_energy, rel=1e-12)
    assert pt.vd_over_vt == pytest.approx(15.0)
    doubled = type(energy15)(2 * energy15.kT, 2 * energy15.joules, energy15.window,
                             energy15.gate_kT, energy15.delays)
    assert information_energy_ratio(net15, 0.5, 0.5, doubled).eta == pytest.approx(pt.eta / 2)


def test_zero_energy_is_undefined():
    with pytest.raises(NumericalError):
        _ratio(1.0, 0.0)


def test_landscape_caches_per_supply(net15):
    land = EtaLandscape(net15)
    a = land.point(5.0, 0.2, 0.7)
    b = land.point(5.0, 0.9, 0.1)
    assert len(land) == 1
    ref = information_energy_ratio(with_supply(net15, 5.0), 0.2, 0.7)
    assert a.eta == pytest.approx(ref.eta, rel=1e-14)
    assert b.eta >= 0


def test_ga_small_run(net15):
    cfg = GaConfig(population=10, generations=4, gene_length_bits=4, seed=2)
    land = EtaLandscape(net15)
    res = ga_optimize(cfg, net15, land)
    assert np.all(np.diff(res.best_eta) >= 0)
    assert res.best.eta == pytest.approx(res.best_eta[-1], rel=1e-12)
    assert 4.0 <= res.best.vd_over_vt <= 6.0
    assert len(land) <= 16
    assert res.evaluations <= 40


# parity circuit -----------------------------------------------------------

def _pair(p, x):
    return p if x == 0 else 1 - p


def _brute_parity(pp: ParityParams):
    # enumerate (a, b, c) at two successive times through an ideal first XOR
    P2 = np.zeros((4, 4))
    for a, b, c, a2, b2, c2 in itertools.product((0, 1), repeat=6):
        w = (_pair(pp.p_a, a) * _pair(pp.p_b, b) * _pair(pp.p_c, c)
             * _pair(pp.p_a, a2) * _pair(pp.p_b, b2) * _pair(pp.p_c, c2))
        P2[2 * (a ^ b) + c, 2 * (a2 ^ b2) + c2] += w
    return P2


@given(prob, prob, prob)
@settings(max_examples=100)
def test_parity_transitions_brute_force(pa, pb, pc):
    pp = ParityParams(pa, pb, pc)
    tr = parity_transition_matrices(pp)
    np.testing.assert_allclose(tr.xor2.p, _brute_parity(pp), atol=1e-14)
    assert tr.lambdas.sum() == pytest.approx(1.0)
    assert tr.xor1.p.sum() == pytest.approx(1.0)
    q0 = pa * pb + (1 - pa) * (1 - pb)
    np.testing.assert_allclose(tr.lambdas, [q0 * q0, q0 * (1 - q0), (1 - q0) * q0,
                                            (1 - q0) ** 2], atol=1e-14)


def test_parity_uniform_lambdas():
    np.testing.assert_allclose(parity_transition_matrices(ParityParams(.5, .5, .5)).lambdas,
                               [0.25] * 4)
    with pytest.raises(ValueError):
        ParityParams(0.5, 1.5, 0.5)


def test_parity_conditional_brute_force(rng):
    W1 = ChannelMatrix(rng.dirichlet(np.ones(3), size=4))
    W2 = ChannelMatrix(rng.dirichlet(np.ones(3), size=4))
    got = parity_conditional(W1, W2)
    for a, b, c in itertools.product((0, 1), repeat=3):
        ref = np.zeros(3)
        for y1 in range(3):
            p1 = W1.p[2 * a + b, y1]
            if y1 == 2:
                ref[2] += p1
            else:
                ref += p1 * W2.p[2 * y1 + c]
        np.testing.assert_allclose(got[4 * a + 2 * b + c], ref, atol=1e-15)
    np.testing.assert_allclose(got.sum(axis=1), 1.0)


@given(prob, prob, prob)
def test_ideal_parity_information(pa, pb, pc):
    q0 = pa * pb + (1 - pa) * (1 - pb)
    y0 = q0 * pc + (1 - q0) * (1 - pc)
    mi = parity_mutual_information(symmetric_flip_channel(0.0), ParityParams(pa, pb, pc))
    assert mi == pytest.approx(entropy([y0, 1 - y0]), abs=1e-12)


def test_parity_energy_linear(rng):
    E = rng.random((4, 4))
    tr = parity_transition_matrices(ParityParams(0.3, 0.6, 0.2))
    assert parity_energy(E, tr) == pytest.approx((E * tr.xor1.p).sum() + (E * tr.xor2.p).sum())
    assert parity_energy(np.ones((4, 4)), tr) == pytest.approx(2.0)
    assert parity_energy(E, tr, 3 * E) == pytest.approx((E * tr.xor1.p).sum()
                                                        + 3 * (E * tr.xor2.p).sum())


def test_parity_efficiency_point(net15, energy15):
    pt = parity_efficiency(net15, ParityParams(.5, .5, .5), energy15)
    assert pt.mutual_information == pytest.approx(1.0, abs=1e-9)
    assert pt.efficiency == pytest.approx(pt.mutual_information / pt.energy, rel=1e-12)
    assert pt.energy == pytest.approx(2 * energy15.kT.mean(), rel=1e-12)


def test_gaussian_channel_uses_output_load(net15):
    W = gaussian_channel(net15).p
    assert W[0, 0] == pytest.approx(1.0) and W[1, 1] == pytest.approx(1.0)
