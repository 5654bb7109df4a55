"""Master equation of one NAND gate: generator, propagation, currents, work."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.sparse.csgraph import connected_components

from . import _kernels as K
from .errors import NeverSettlesError, NumericalError, ReducibleGeneratorError
from .physics import NandParams, SITES, bose_pair, fermi_occupation, nand_energy_levels

__all__ = [
    "ELECTRODE_EDGES", "ISLAND_EDGES", "RateMatrix", "NodeTrace", "NandModel",
    "SteadyOutput", "Dissipation", "nand_model", "build_rate_matrix",
    "steady_state", "check_distribution", "propagate", "integrate",
    "mean_occupations", "electrode_current", "nand_dissipation",
    "dissipation_integrand", "propagation_delay", "steady_output", "relaxation_time",
]

# physical couplings of one gate; island pairs follow the hops present in
# the generator (P1-P2, N1-N2 and the two N1-P cross hops)
ELECTRODE_EDGES = (("P1", "d"), ("P2", "d"), ("P1", "g"), ("P2", "g"), ("N1", "g"), ("N2", "s"))
ISLAND_EDGES = (("P1", "P2"), ("N1", "N2"), ("N1", "P1"), ("N1", "P2"))
_BIT = {name: k for k, name in enumerate(SITES)}
TRACE_ORDER = ("P1", "P2", "N1", "N2")


@dataclass(frozen=True)
class NandModel:
    """Reduced-unit snapshot of :class:`NandParams` used by the kernels."""

    eps: np.ndarray         # island levels in kT, bit order N1, N2, P1, P2
    mu_d: float             # kT (equal to v_d / V_T)
    mu_s: float
    cap: float              # load capacitance in q / V_T
    dot_fw: np.ndarray      # hop rates / Gamma, island a -> b
    dot_bw: np.ndarray
    gamma: float
    kT: float
    v_t: float


def nand_model(params: NandParams) -> NandModel:
    return _nand_model(params)


@lru_cache(maxsize=4096)
def _nand_model(params: NandParams) -> NandModel:
    c = params.constants
    lv = nand_energy_levels(params)
    eps = np.array([lv.level(s) for s in SITES]) / c.kT
    fw, bw = np.empty(4), np.empty(4)
    for k, (a, b) in enumerate(ISLAND_EDGES):
        fw[k], bw[k] = bose_pair((eps[_BIT[b]] - eps[_BIT[a]]), 1.0,
                                 params.levels.max_bose_factor)
    eps.setflags(write=False)
    fw.setflags(write=False)
    bw.setflags(write=False)
    return NandModel(eps, params.v_d / c.thermal_voltage, params.v_s / c.thermal_voltage,
                     params.c_g * c.thermal_voltage / c.charge, fw, bw,
                     params.gamma, c.kT, c.thermal_voltage)


@dataclass(frozen=True)
class RateMatrix:
    """16x16 generator in 1/s; entry (m, n) is the rate n -> m."""

    rates: np.ndarray
    v_out: float

    def __post_init__(self):
        self.rates.setflags(write=False)

    @property
    def exit_rates(self) -> np.ndarray:
        return -np.diag(self.rates)


def build_rate_matrix(params: NandParams, v_out: float) -> RateMatrix:
    """Generator of one NAND at load-node potential ``v_out`` (volts).

    Built edge by edge from the Fermi factors of the electrode couplings and
    the Bose factors of the island hops.
    """
    c = params.constants
    lv = nand_energy_levels(params, v_out)
    beta = c.beta
    D = np.zeros((16, 16))
    for site, el in ELECTRODE_EDGES:
        j = _BIT[site]
        f = fermi_occupation(lv.level(site), lv.potential(el), beta)
        fbar = fermi_occupation(2 * lv.potential(el) - lv.level(site), lv.potential(el), beta)
        for s in range(16):
            D[s ^ (1 << j), s] += fbar if (s >> j) & 1 else f
    for a, b in ISLAND_EDGES:
        ja, jb = _BIT[a], _BIT[b]
        fw, bw = bose_pair(lv.level(b) - lv.level(a), beta, params.levels.max_bose_factor)
        for s in range(16):
            oa, ob = (s >> ja) & 1, (s >> jb) & 1
            if oa != ob:
                D[s ^ (1 << ja) ^ (1 << jb), s] += fw if oa else bw
    D -= np.diag(D.sum(axis=0))
    return RateMatrix(D * params.gamma, float(v_out))


def check_distribution(p, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (16,):
        raise ValueError(f"distribution must have 16 entries, got shape {p.shape}")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > tol:
        raise ValueError("not a probability vector")
    return p


def steady_state(matrix) -> np.ndarray:
    """Unique stationary distribution of a generator (RateMatrix or array)."""
    D = np.asarray(getattr(matrix, "rates", matrix), dtype=float)
    n = D.shape[0]
    adj = (D > 0) & ~np.eye(n, dtype=bool)
    # adjacency for scc: edge n -> m when D[m, n] > 0
    ncomp, labels = connected_components(adj.T, directed=True, connection="strong")
    closed = 0
    for c in range(ncomp):
        members = labels == c
        leaving = adj[~members][:, members].any()
        closed += not leaving
    if closed != 1:
        raise ReducibleGeneratorError(f"generator has {closed} closed classes")
    scale = np.abs(D).max()
    A = np.vstack([D / scale, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if not np.all(np.isfinite(pi)) or np.abs(D @ pi).max() > 1e-9 * scale:
        raise NumericalError("stationary solve did not converge")
    return pi


def _reduced_steady(m: NandModel, v: float) -> np.ndarray:
    A = np.empty((16, 16))
    K.fill_generator(m.eps, m.mu_d, m.mu_s, v, m.dot_fw, m.dot_bw, A)
    return steady_state(A)


@dataclass(frozen=True)
class NodeTrace:
    """Time series of one gate: SI time and voltage, 16-state distributions,
    mean occupations (P1, P2, N1, N2) and cumulative dissipation in kT."""

    time: np.ndarray
    v_out: np.ndarray
    distributions: np.ndarray
    occupations: np.ndarray
    work_kT: np.ndarray
    v_d: float
    v_s: float
    kT: float

    def to_csv(self, path, header: str = "") -> None:
        from .io import write_csv
        cols = (["time_s", "v_out_V"] + [f"p_state_{k}" for k in range(16)]
                + [f"n_{s}" for s in TRACE_ORDER])
        data = np.column_stack([self.time, self.v_out, self.distributions, self.occupations])
        write_csv(path, cols, data, header)


def mean_occupations(p) -> np.ndarray:
    """Mean occupation of (P1, P2, N1, N2) from one or many distributions."""
    p = np.asarray(p)
    bits = np.array([[(s >> _BIT[x]) & 1 for x in TRACE_ORDER] for s in range(16)], float)
    return p @ bits


def integrate(params: NandParams, p0, v0: float, t_end: float, *, v_stop: float = np.nan,
              stop_tol: float = 0.0, frozen: bool = False, method: str = "expm",
              dv_max: float = 0.02, dp_max: float = 0.02, h_max: float = 20.0,
              safety: float = 0.1, stride: int = 1) -> NodeTrace:
    """Integrate the master equation with load-node feedback.

    Times are in seconds, voltages in volts.  ``method="expm"`` (default)
    uses the adaptive exponential stepper; ``"heun"`` the explicit reference
    scheme with step ``safety / max|diag|``.  Integration stops early once
    ``|v_out - v_stop| <= stop_tol``.
    """
    m = nand_model(params)
    p0 = check_distribution(p0)
    vt = m.v_t
    tg = t_end * m.gamma
    if method == "expm":
        n, t, v, P, W = K.integrate_expm(m.eps, m.mu_d, m.mu_s, m.cap, m.dot_fw, m.dot_bw,
                                         p0, v0 / vt, tg, v_stop / vt, stop_tol / vt,
                                         dv_max, dp_max, h_max, frozen)
    elif method == "heun":
        n, t, v, P, W = K.integrate_heun(m.eps, m.mu_d, m.mu_s, m.cap, m.dot_fw, m.dot_bw,
                                         p0, v0 / vt, tg, safety, stride, frozen)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(v)):
        raise NumericalError("node voltage diverged")
    return NodeTrace(t / m.gamma, v * vt, P, mean_occupations(P), W, params.v_d,
                     params.v_s, m.kT)


def propagate(state, dt: float, params: NandParams, v_out: float, *, frozen: bool = False,
              **kw) -> tuple[np.ndarray, float]:
    """Advance (distribution, v_out) by ``dt`` seconds."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    p = check_distribution(state)
    if dt == 0:
        return p.copy(), float(v_out)
    tr = integrate(params, p, v_out, dt, frozen=frozen, **kw)
    return tr.distributions[-1], float(tr.v_out[-1])


def electrode_current(params: NandParams, electrode: str, transistor: str,
                      mean_occupation: float, v_out: float | None = None) -> float:
    """Current (A) from an electrode into an island: q (delta_in (1-n) - delta_out n)."""
    if (transistor, electrode) not in ELECTRODE_EDGES:
        raise ValueError(f"no coupling between {electrode} and {transistor}")
    if not 0.0 <= mean_occupation <= 1.0:
        raise ValueError("mean occupation must lie in [0, 1]")
    c = params.constants
    lv = nand_energy_levels(params, v_out)
    mu, eps = lv.potential(electrode), lv.level(transistor)
    fill = params.gamma * fermi_occupation(eps, mu, c.beta)
    empty = params.gamma * fermi_occupation(2 * mu - eps, mu, c.beta)
    return c.charge * (fill * (1.0 - mean_occupation) - empty * mean_occupation)


@dataclass(frozen=True)
class Dissipation:
    joules: float
    kT: float


def nand_dissipation(trace: NodeTrace, tau: float) -> Dissipation:
    """Dissipated work over [0, tau] from the trace's trapezoid accumulation."""
    if tau < 0 or tau > trace.time[-1] * (1 + 1e-12):
        raise ValueError(f"tau={tau} outside trace coverage [0, {trace.time[-1]}]")
    w = float(np.interp(tau, trace.time, trace.work_kT))
    return Dissipation(w * trace.kT, w)


def dissipation_integrand(trace: NodeTrace, params: NandParams) -> np.ndarray:
    """Recompute the dissipation rate (kT per second) at each trace sample."""
    m = nand_model(params)
    return np.array([K.supply_power(m.eps, m.mu_d, m.mu_s, v / m.v_t, p)
                     for v, p in zip(trace.v_out, trace.distributions)]) * m.gamma


def propagation_delay(trace: NodeTrace, expected: int, alpha: float) -> float:
    """Time after which v_out stays within alpha (v_d - v_s) of its logic level."""
    if expected not in (0, 1):
        raise ValueError("expected must be 0 or 1")
    target = trace.v_d if expected else trace.v_s
    band = alpha * (trace.v_d - trace.v_s)
    dev = np.abs(trace.v_out - target)
    outside = np.flatnonzero(dev > band)
    if outside.size == 0:
        return 0.0
    k = outside[-1]
    if k == len(dev) - 1:
        raise NeverSettlesError(f"output never settles at logic {expected}")
    # linear crossing between the last sample outside and the first inside
    t0, t1, d0, d1 = trace.time[k], trace.time[k + 1], dev[k], dev[k + 1]
    return float(t0 + (t1 - t0) * (d0 - band) / (d0 - d1))


@dataclass(frozen=True)
class SteadyOutput:
    """Self-consistent steady state: node voltage (V), distribution and
    static dissipation rate (kT per 1/Gamma)."""

    v_out: float
    distribution: np.ndarray
    static_power: float


def steady_output(params: NandParams) -> SteadyOutput:
    return _steady_output(params)


@lru_cache(maxsize=4096)
def _steady_output(params: NandParams) -> SteadyOutput:
    m = nand_model(params)
    lo, hi = m.mu_s - 60.0, m.mu_d + 60.0

    def jg(v):
        return K.gate_current(m.eps, v, _reduced_steady(m, v))

    try:
        v = brentq(jg, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    except ValueError as exc:
        raise NumericalError(f"no steady node voltage: {exc}") from exc
    pi = _reduced_steady(m, v)
    pi.setflags(write=False)
    return SteadyOutput(v * m.v_t, pi, float(K.supply_power(m.eps, m.mu_d, m.mu_s, v, pi)))


def relaxation_time(params: NandParams) -> float:
    """Linear RC time of the load node about its steady voltage, in seconds.

    Slower than the island kinetics by orders of magnitude: the node holds
    ``c`` carriers per thermal voltage and drains through a single level.
    """
    m = nand_model(params)
    v = steady_output(params).v_out / m.v_t
    h = 1e-4

    def jg(x):
        return K.gate_current(m.eps, x, _reduced_steady(m, x))

    g = abs(jg(v + h) - jg(v - h)) / (2 * h)
    if not g > 0:
        raise NumericalError("node conductance vanishes at the steady voltage")
    return m.cap / g / m.gamma

