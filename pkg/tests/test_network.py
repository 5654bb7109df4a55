from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mesoxor.network import (TernaryLogic, XorNetlist, average_xor_energy,
                             input_transition_matrix, logic_map, steady_voltages,
                             switching_model_energy, with_supply, xor_energy_matrix)
from mesoxor.physics import NandParams
from mesoxor.io import read_csv

prob = st.floats(0, 1)


@pytest.mark.parametrize("v,out", [(0.0, TernaryLogic.ZERO), (0.2, TernaryLogic.ZERO),
                                   (0.5, TernaryLogic.ERASURE), (0.8, TernaryLogic.ONE),
                                   (1.3, TernaryLogic.ONE), (-0.3, TernaryLogic.ZERO)])
def test_logic_map(v, out):
    assert logic_map(v, 1.0, 0.2) is out


def test_logic_map_bad_alpha():
    with pytest.raises(ValueError):
        logic_map(0.1, 1.0, 0.6)
    assert str(TernaryLogic.ERASURE) == "∅"


def test_xor_truth_table(net15):
    for ab in ("00", "01", "10", "11"):
        y = steady_voltages(net15, ab)["Y"]
        want = int(ab[0]) ^ int(ab[1])
        assert logic_map(y, net15.v_d, net15.alpha) is TernaryLogic(want)


def test_xor_truth_table_low_supply():
    net = XorNetlist.uniform(NandParams.at_supply(4.0))
    for ab in ("00", "01", "10", "11"):
        y = steady_voltages(net, ab)["Y"]
        assert logic_map(y, net.v_d, net.alpha).value == int(ab[0]) ^ int(ab[1])


def test_netlist_validation(p15):
    with pytest.raises(ValueError):
        XorNetlist((p15,) * 3)
    with pytest.raises(ValueError):
        XorNetlist((p15, p15, p15, replace(p15, v_d=2 * p15.v_d)))


@given(prob, prob)
def test_transition_matrix_structure(pa, pb):
    P = input_transition_matrix(pa, pb).p
    assert P.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(P >= 0)
    pair = np.outer([pa, 1 - pa], [pb, 1 - pb]).ravel()
    np.testing.assert_allclose(P.sum(axis=1), pair, atol=1e-15)
    np.testing.assert_allclose(P, P.T, atol=1e-15)


def test_transition_matrix_uniform():
    np.testing.assert_allclose(input_transition_matrix(0.5, 0.5).p, np.full((4, 4), 1 / 16))
    with pytest.raises(ValueError):
        input_transition_matrix(1.2, 0.5)


def test_average_energy_linear(rng):
    E = rng.random((4, 4))
    P = input_transition_matrix(0.3, 0.8)
    assert average_xor_energy(2 * E, P) == pytest.approx(2 * average_xor_energy(E, P))
    assert average_xor_energy(np.ones((4, 4)), P) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        average_xor_energy(E, np.ones((4, 4)))


def test_switching_model_value():
    j, kT = switching_model_energy(0.2, 1.62e-16, 15 * 0.025851999786435535)
    assert kT == pytest.approx(1176.2815312853643, rel=1e-12)
    assert j == pytest.approx(0.2 * 1.62e-16 * (15 * 0.025851999786435535) ** 2)
    with pytest.raises(ValueError):
        switching_model_energy(0.2, 0.0, 1.0)


def test_energy_matrix_properties(energy15):
    E = energy15.kT
    assert np.all(E > 0)
    # holding the inputs costs only static power; any switch costs charging work
    assert np.all(np.diag(E) < 0.01 * np.min(E + np.diag(np.full(4, np.inf))))
    # gates start and end in the same steady states when both inputs swap
    np.testing.assert_allclose(energy15.joules, E * 1.380649e-23 * 300, rtol=1e-14)
    np.testing.assert_allclose(energy15.gate_kT.sum(axis=0), E)
    assert energy15.window == pytest.approx(energy15.delays.max())


def test_energy_matrix_gamma_invariant(net15, energy15):
    slow = XorNetlist(tuple(replace(g, gamma=1e9) for g in net15.gates))
    E = xor_energy_matrix(slow)
    np.testing.assert_allclose(E.kT, energy15.kT, rtol=1e-9)
    assert E.window == pytest.approx(energy15.window * 1e3, rel=1e-9)


def test_with_supply(net15):
    n = with_supply(net15, 5.0)
    assert n.v_d == pytest.approx(5.0 * net15.constants.thermal_voltage)
    assert all(g.c_g == h.c_g for g, h in zip(n.gates, net15.gates))


def test_matrix_csv_roundtrip(tmp_path, energy15):
    energy15.to_csv(tmp_path / "e.csv", "demo")
    text = (tmp_path / "e.csv").read_text()
    assert text.startswith("# demo\n# units: kT\nprev\\next,00,01,10,11\n")
    cols, data = read_csv(tmp_path / "e.csv")
    assert cols[0] == "prev\\next"
    np.testing.assert_array_equal(data[:, 1:], energy15.kT)
