"""Constants, NAND parameterization, microstates and occupation statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import expit

__all__ = [
    "PhysicalConstants", "LevelMap", "NandParams", "TransistorSpec",
    "ElectrodeSpec", "NandLevels", "GateState", "SITES", "fermi_occupation",
    "bose_occupation", "bose_pair", "nand_energy_levels", "enumerate_states",
]

BOLTZMANN = 1.380649e-23        # J/K, exact SI
ELEMENTARY_CHARGE = 1.602176634e-19   # C, exact SI

# bit position of each island in the state index
SITES = ("N1", "N2", "P1", "P2")
_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class PhysicalConstants:
    boltzmann: float = BOLTZMANN
    charge: float = ELEMENTARY_CHARGE
    temperature: float = 300.0

    def __post_init__(self):
        for name in ("boltzmann", "charge", "temperature"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")

    @property
    def kT(self) -> float:
        return self.boltzmann * self.temperature

    @property
    def beta(self) -> float:
        return 1.0 / self.kT

    @property
    def thermal_voltage(self) -> float:
        return self.kT / self.charge


@dataclass(frozen=True)
class LevelMap:
    """Affine voltage-to-level map of the four islands.

    Levels are written relative to the rail Fermi levels::

        eps_P = mu_d - eps0_p - kappa * q * (V_gate - v_s)
        eps_N = mu_s + eps0_n + kappa * q * (v_d - V_gate)

    so an N island is ``eps0_n`` above the source level when its gate is at
    ``v_d`` and a P island is ``eps0_p`` below the drain level when its gate
    is at ``v_s``.  Both levels fall linearly as the controlling input rises.
    A negative margin places the on-state level beyond the rail.

    Parameters
    ----------
    eps0_p_kT, eps0_n_kT : float
        On-state margins in units of kT.
    lever_arm : float
        Gate lever arm kappa (dimensionless).
    max_bose_factor : float
        Cap on island-to-island rates in units of Gamma.
    """

    eps0_p_kT: float = 1.0
    eps0_n_kT: float = -3.0
    lever_arm: float = 1.9
    max_bose_factor: float = 1.0

    def __post_init__(self):
        for name in ("eps0_p_kT", "eps0_n_kT", "lever_arm", "max_bose_factor"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.lever_arm <= 0:
            raise ValueError("lever_arm must be positive")
        if self.max_bose_factor <= 0:
            raise ValueError("max_bose_factor must be positive")


@dataclass(frozen=True)
class NandParams:
    """One NAND gate. Voltages in volts, ``c_g`` in farads, ``gamma`` in 1/s."""

    v_d: float
    v_s: float = 0.0
    v_a: float = 0.0
    v_b: float = 0.0
    c_g: float = 1.62e-16
    gamma: float = 1e12
    alpha: float = 0.2
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    levels: LevelMap = field(default_factory=LevelMap)

    def __post_init__(self):
        for name in ("v_d", "v_s", "v_a", "v_b", "c_g", "gamma", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.c_g <= 0:
            raise ValueError("c_g must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not self.v_d > self.v_s:
            raise ValueError("v_d must exceed v_s")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")

    @classmethod
    def at_supply(cls, vd_over_vt: float, **kw) -> "NandParams":
        """Build params with ``v_d`` given in thermal-voltage units."""
        const = kw.get("constants", PhysicalConstants())
        return cls(v_d=vd_over_vt * const.thermal_voltage, **kw)

    @property
    def vd_over_vt(self) -> float:
        return self.v_d / self.constants.thermal_voltage

    def with_inputs(self, v_a: float, v_b: float) -> "NandParams":
        from dataclasses import replace
        return replace(self, v_a=float(v_a), v_b=float(v_b))


@dataclass(frozen=True)
class TransistorSpec:
    label: str
    kind: str
    energy_level: float     # J


@dataclass(frozen=True)
class ElectrodeSpec:
    label: str
    chemical_potential: float   # J


class NandLevels(NamedTuple):
    transistors: tuple[TransistorSpec, ...]
    electrodes: tuple[ElectrodeSpec, ...]

    def level(self, label: str) -> float:
        return next(t.energy_level for t in self.transistors if t.label == label)

    def potential(self, label: str) -> float:
        return next(e.chemical_potential for e in self.electrodes if e.label == label)


@dataclass(frozen=True)
class GateState:
    """Occupancy ``(n_N1, n_N2, n_P1, n_P2)`` with index n_N1 + 2 n_N2 + 4 n_P1 + 8 n_P2."""

    n_N1: int
    n_N2: int
    n_P1: int
    n_P2: int

    def __post_init__(self):
        if any(n not in (0, 1) for n in self.occupancy):
            raise ValueError("occupancies must be 0 or 1")

    @property
    def occupancy(self) -> tuple[int, int, int, int]:
        return (self.n_N1, self.n_N2, self.n_P1, self.n_P2)

    @property
    def index(self) -> int:
        return self.n_N1 + 2 * self.n_N2 + 4 * self.n_P1 + 8 * self.n_P2

    @classmethod
    def from_index(cls, index: int) -> "GateState":
        index = int(index)
        if not 0 <= index < 16:
            raise ValueError(f"state index out of range: {index}")
        return cls(*((index >> k) & 1 for k in range(4)))


def enumerate_states() -> list[GateState]:
    return [GateState.from_index(i) for i in range(16)]


def _check_finite(*xs):
    for x in xs:
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite input")


def fermi_occupation(eps, mu, beta):
    """Fermi function ``1 / (exp(beta (eps - mu)) + 1)``, overflow-free."""
    _check_finite(eps, mu, beta)
    if np.any(np.asarray(beta) <= 0):
        raise ValueError("beta must be positive")
    out = expit(-np.asarray(beta) * (np.asarray(eps) - np.asarray(mu)))
    return float(out) if np.ndim(out) == 0 else out


def _bose(x: float) -> float:
    # n_B(x) for x > 0, written to avoid overflow at large x
    if x < _SERIES_CUTOFF:
        return 1.0 / x - 0.5
    return math.exp(-x) / -math.expm1(-x)


def bose_occupation(delta, beta, cap: float = 1e300) -> float:
    """Rate factor for a move that raises the energy by ``delta``.

    Absorption (``delta > 0``) gives ``n_B``, emission gives ``1 + n_B``, so
    forward/backward factors obey detailed balance.  Near ``delta = 0`` the
    series ``1/x - 1/2`` is used and the result is clipped at ``cap``.
    """
    _check_finite(delta, beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = float(beta * delta)
    if x == 0.0:
        return float(cap)
    val = _bose(x) if x > 0 else 1.0 + _bose(-x)
    return min(val, float(cap))


def bose_pair(delta, beta, cap: float) -> tuple[float, float]:
    """Forward and backward factors for a move of energy change ``delta``.

    If either exceeds ``cap`` both are scaled by the same factor, which keeps
    their ratio at ``exp(-beta delta)``.  At ``delta = 0`` both equal ``cap``.
    """
    x = float(beta * delta)
    if abs(x) < _SERIES_CUTOFF:
        # both factors diverge as 1/|x|; their ratio tends to 1
        # the larger factor sits at the cap, the other keeps the ratio exp(-x)
        if x > 0:
            return float(cap) * math.exp(-x), float(cap)
        return float(cap), float(cap) * math.exp(x)
    fw = bose_occupation(delta, beta)
    bw = bose_occupation(-delta, beta)
    m = max(fw, bw)
    if m > cap:
        s = cap / m
        fw, bw = fw * s, bw * s
    return fw, bw


def nand_energy_levels(params: NandParams, v_out: float | None = None) -> NandLevels:
    """Island levels and electrode chemical potentials, all in joules.

    ``v_out`` sets the load-node potential; it defaults to ``v_s``.
    """
    c = params.constants
    q, kT = c.charge, c.kT
    lm = params.levels
    v_out = params.v_s if v_out is None else float(v_out)
    _check_finite(v_out)
    mu_d, mu_s, mu_g = q * params.v_d, q * params.v_s, q * v_out

    def p_level(vg):
        return mu_d - lm.eps0_p_kT * kT - lm.lever_arm * q * (vg - params.v_s)

    def n_level(vg):
        return mu_s + lm.eps0_n_kT * kT + lm.lever_arm * q * (params.v_d - vg)

    transistors = (
        TransistorSpec("P1", "P", p_level(params.v_a)),
        TransistorSpec("P2", "P", p_level(params.v_b)),
        TransistorSpec("N1", "N", n_level(params.v_a)),
        TransistorSpec("N2", "N", n_level(params.v_b)),
    )
    electrodes = (ElectrodeSpec("d", mu_d), ElectrodeSpec("s", mu_s), ElectrodeSpec("g", mu_g))
    return NandLevels(transistors, electrodes)
