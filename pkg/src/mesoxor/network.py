"""Four-NAND XOR: ternary readout, energy and input-transition matrices."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import NeverSettlesError
from .io import LABELS, write_matrix
from .master import integrate, propagation_delay, steady_output
from .physics import NandParams, PhysicalConstants

__all__ = [
    "INPUT_PAIRS", "GATES", "TernaryLogic", "XorNetlist", "EnergyMatrix",
    "TransitionMatrix", "logic_map", "steady_voltages", "xor_energy_matrix",
    "input_transition_matrix", "average_xor_energy", "switching_model_energy", "with_supply",
]

INPUT_PAIRS = LABELS
GATES = ("NAND1", "NAND2", "NAND3", "NAND4")
# (input a, input b) -> output, in topological order
WIRING = (("A", "B", "u"), ("A", "u", "v"), ("u", "B", "w"), ("v", "w", "Y"))


class TernaryLogic(enum.Enum):
    ZERO = 0
    ONE = 1
    ERASURE = "∅"

    def __str__(self):
        return str(self.value)


def logic_map(v: float, v_d: float, alpha: float, v_s: float = 0.0) -> TernaryLogic:
    """0 below alpha of the swing, 1 above (1 - alpha), erasure in between."""
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    x = v - v_s
    swing = v_d - v_s
    if x <= alpha * swing:
        return TernaryLogic.ZERO
    if x >= (1.0 - alpha) * swing:
        return TernaryLogic.ONE
    return TernaryLogic.ERASURE


@dataclass(frozen=True)
class XorNetlist:
    """NAND1(A,B)->u, NAND2(A,u)->v, NAND3(u,B)->w, NAND4(v,w)->Y.

    ``gates`` holds one parameter template per NAND; its input voltages are
    overwritten during simulation and its ``c_g`` loads that gate's output.
    All gates share the supply rails of the first one.
    """

    gates: tuple[NandParams, NandParams, NandParams, NandParams]

    def __post_init__(self):
        if len(self.gates) != 4:
            raise ValueError("an XOR needs exactly four NAND gates")
        g0 = self.gates[0]
        if any(g.v_d != g0.v_d or g.v_s != g0.v_s for g in self.gates):
            raise ValueError("all gates must share the supply rails")

    @classmethod
    def uniform(cls, params: NandParams) -> "XorNetlist":
        return cls((params,) * 4)

    @property
    def v_d(self) -> float:
        return self.gates[0].v_d

    @property
    def v_s(self) -> float:
        return self.gates[0].v_s

    @property
    def alpha(self) -> float:
        return self.gates[0].alpha

    @property
    def constants(self) -> PhysicalConstants:
        return self.gates[0].constants


def _pair_voltages(net: XorNetlist, k: int) -> tuple[float, float]:
    a, b = divmod(k, 2)
    return (net.v_d if a else net.v_s), (net.v_d if b else net.v_s)


def steady_voltages(net: XorNetlist, ab: int | str) -> dict[str, float]:
    """Node voltages with every gate at its steady state, inputs held at ``ab``."""
    k = INPUT_PAIRS.index(ab) if isinstance(ab, str) else int(ab)
    va, vb = _pair_voltages(net, k)
    nodes = {"A": va, "B": vb}
    for g, (x, y, out) in zip(net.gates, WIRING):
        nodes[out] = steady_output(g.with_inputs(nodes[x], nodes[y])).v_out
    return nodes


@dataclass(frozen=True)
class EnergyMatrix:
    """Per-operation dissipation, entry (prev, next), in kT.

    ``window`` is the common operation period (s) over which every gate's
    dissipation is integrated: the slowest settling time of any gate in any
    input transition.  ``gate_kT[g, prev, next]`` and ``delays[g, prev, next]``
    hold the per-gate pieces.
    """

    kT: np.ndarray
    joules: np.ndarray
    window: float
    gate_kT: np.ndarray
    delays: np.ndarray

    def to_csv(self, path, header: str = "") -> None:
        write_matrix(path, self.kT, (header + "\n" if header else "") + "units: kT")


@dataclass(frozen=True)
class TransitionMatrix:
    """Joint weights P(prev, next) over input pairs; total mass 1."""

    p: np.ndarray

    def to_csv(self, path, header: str = "") -> None:
        write_matrix(path, self.p, (header + "\n" if header else "") + "units: probability")


@dataclass
class _Run:
    delay: float      # seconds
    t_end: float      # seconds
    work: np.ndarray  # kT at trace samples
    time: np.ndarray
    static: float     # kT per second at the final steady state


def _switch(prev: NandParams, nxt: NandParams, gate: str, settle_tol: float,
            horizon: float) -> _Run:
    so, s1 = steady_output(prev), steady_output(nxt)
    rate = s1.static_power * nxt.gamma
    if prev == nxt:
        return _Run(0.0, 0.0, np.zeros(1), np.zeros(1), rate)
    lvl = logic_map(s1.v_out, nxt.v_d, nxt.alpha, nxt.v_s)
    if lvl is TernaryLogic.ERASURE:
        raise NeverSettlesError(f"steady output {s1.v_out:.4g} V is not a logic level", gate)
    vt = nxt.constants.thermal_voltage
    tr = integrate(nxt, so.distribution, so.v_out, horizon, v_stop=s1.v_out,
                   stop_tol=settle_tol * vt)
    if abs(tr.v_out[-1] - s1.v_out) > settle_tol * vt:
        raise NeverSettlesError(f"not settled within {horizon:.3g} s", gate)
    try:
        tau = propagation_delay(tr, lvl.value, nxt.alpha)
    except NeverSettlesError as exc:
        raise NeverSettlesError(str(exc), gate) from None
    return _Run(tau, float(tr.time[-1]), tr.work_kT, tr.time, rate)


def xor_energy_matrix(net: XorNetlist, *, settle_tol: float = 1e-4,
                      horizon_per_gamma: float = 1e6) -> EnergyMatrix:
    """Dissipation of the XOR for each of the 16 (prev, next) input transitions.

    Every gate starts at the steady state of the previous inputs and is
    switched to the next inputs, with downstream gates seeing the upstream
    steady-state voltages.  Each gate's work is integrated over the common
    operation window (the largest settling delay found), so gates that
    settle early keep dissipating their static power until the window ends.
    ``settle_tol`` is in V_T.
    """
    steady = [steady_voltages(net, k) for k in range(4)]
    runs: dict[tuple, _Run] = {}
    keys = np.empty((4, 4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            for g, (params, (x, y, _)) in enumerate(zip(net.gates, WIRING)):
                a = params.with_inputs(steady[i][x], steady[i][y])
                b = params.with_inputs(steady[j][x], steady[j][y])
                if (a, b) not in runs:
                    runs[a, b] = _switch(a, b, GATES[g], settle_tol,
                                         horizon_per_gamma / params.gamma)
                keys[g, i, j] = (a, b)
    window = max(r.delay for r in runs.values())
    gate_kT = np.empty((4, 4, 4))
    delays = np.empty((4, 4, 4))
    for idx in np.ndindex(4, 4, 4):
        r = runs[keys[idx]]
        delays[idx] = r.delay
        if window <= r.t_end:
            gate_kT[idx] = np.interp(window, r.time, r.work)
        else:
            gate_kT[idx] = r.work[-1] + r.static * (window - r.t_end)
    E = gate_kT.sum(axis=0)
    return EnergyMatrix(E, E * net.constants.kT, float(window), gate_kT, delays)


def input_transition_matrix(p_a: float, p_b: float) -> TransitionMatrix:
    """Joint weights P(prev) P(next) for i.i.d. inputs with P(a=0)=p_a, P(b=0)=p_b."""
    for x in (p_a, p_b):
        if not 0.0 <= x <= 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
    pa = np.array([p_a, 1.0 - p_a])
    pb = np.array([p_b, 1.0 - p_b])
    pair = np.outer(pa, pb).ravel()      # order 00, 01, 10, 11
    return TransitionMatrix(np.outer(pair, pair))


def average_xor_energy(E, P) -> float:
    """Sum of E * P over all transitions (kT)."""
    e = np.asarray(getattr(E, "kT", E), float)
    w = np.asarray(getattr(P, "p", P), float)
    if e.shape != (4, 4) or w.shape != (4, 4):
        raise ValueError("expected 4x4 matrices")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("transition weights must sum to 1")
    return float((e * w).sum())


def switching_model_energy(zeta: float, c: float, v_dd: float,
                           constants: PhysicalConstants = PhysicalConstants()) -> tuple[float, float]:
    """Per-operation switching energy zeta C V^2 as (joules, kT)."""
    if zeta < 0 or c <= 0 or v_dd <= 0:
        raise ValueError("zeta must be nonnegative, c and v_dd positive")
    e = zeta * c * v_dd ** 2
    return e, e / constants.kT


def with_supply(net: XorNetlist, vd_over_vt: float) -> XorNetlist:
    """Same netlist with every gate moved to a new supply (V_T units)."""
    return XorNetlist(tuple(replace(g, v_d=vd_over_vt * g.constants.thermal_voltage)
                            for g in net.gates))
