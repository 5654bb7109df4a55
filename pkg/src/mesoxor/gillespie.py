"""Exact stochastic simulation of the NAND jump process and XOR output noise."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import _kernels as K
from .io import write_csv
from .master import check_distribution, nand_model, relaxation_time, steady_output
from .network import WIRING, XorNetlist, steady_voltages
from .physics import GateState, NandParams

__all__ = [
    "Trajectory", "OutputStats", "GaussianityReport", "stream", "sample_trajectory",
    "state_marginals", "output_samples", "output_stats", "output_voltage_distribution",
    "gaussianity_check", "simulate_ctmc",
]

_NO_CHECKPOINTS = np.empty(0)
# default burn-in in node relaxation times; leaves a variance deficit ~exp(-10)
BURN_IN_RC = 5.0


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for trajectory ``index`` under master ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


@dataclass(frozen=True)
class Trajectory:
    """Jump record of one NAND realization.

    ``channels`` names the elementary move (0-5 electrode couplings in the
    order of ``ELECTRODE_EDGES``, 6-9 forward and 10-13 backward island hops);
    ``exit_rates`` is the total rate out of the state that was left (1/s).
    """

    times: np.ndarray
    from_state: np.ndarray
    to_state: np.ndarray
    channels: np.ndarray
    exit_rates: np.ndarray
    initial: int
    v_initial: float
    final: int
    v_final: float
    seed: int
    index: int

    @property
    def n_events(self) -> int:
        return len(self.times)


def _state_index(s) -> int:
    return s.index if isinstance(s, GateState) else int(s)


def sample_trajectory(params: NandParams, initial, horizon: float, seed: int, *,
                      v_out: float | None = None, index: int = 0,
                      frozen: bool = False) -> Trajectory:
    """One exact realization over ``horizon`` seconds.

    The load node starts at ``v_out`` (default: the self-consistent steady
    value) and moves by q / c_g on every carrier exchanged with it, unless
    ``frozen``.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    m = nand_model(params)
    s0 = _state_index(initial)
    if not 0 <= s0 < 16:
        raise ValueError("initial state out of range")
    v0 = steady_output(params).v_out if v_out is None else float(v_out)
    rng = stream(seed, index)
    out = K.ssa_nand(m.eps, m.mu_d, m.mu_s, m.cap, m.dot_fw, m.dot_bw, s0, v0 / m.v_t,
                     horizon * m.gamma, rng, True, frozen, _NO_CHECKPOINTS)
    _, t, frm, to, ch, ex, s, v, _, _ = out
    return Trajectory(t / m.gamma, frm, to, ch, ex * m.gamma, s0, v0, int(s), v * m.v_t,
                      int(seed), int(index))


def _start(rng, p0):
    return int(np.searchsorted(np.cumsum(p0), rng.random() * p0.sum(), side="right").clip(0, 15))


def state_marginals(params: NandParams, p0, v_out: float, checkpoints, n_traj: int,
                    seed: int, *, frozen: bool = False) -> np.ndarray:
    """Empirical 16-state distribution at each checkpoint (seconds) from
    ``n_traj`` trajectories whose initial states are drawn from ``p0``."""
    m = nand_model(params)
    p0 = check_distribution(p0)
    cps = np.sort(np.asarray(checkpoints, float)) * m.gamma
    counts = np.zeros((len(cps), 16))
    for i in range(n_traj):
        rng = stream(seed, i)
        s0 = _start(rng, p0)
        res = K.ssa_nand(m.eps, m.mu_d, m.mu_s, m.cap, m.dot_fw, m.dot_bw, s0,
                         v_out / m.v_t, cps[-1], rng, False, frozen, cps)
        counts[np.arange(len(cps)), res[8]] += 1
    return counts / n_traj


def _output_gate(net, ab) -> NandParams:
    nodes = steady_voltages(net, ab)
    params, (x, y, _) = net.gates[3], WIRING[3]
    return params.with_inputs(nodes[x], nodes[y])


def output_samples(net: XorNetlist | NandParams, ab, n_samples: int, burn_in: float | None,
                   seed: int) -> np.ndarray:
    """Output-node voltages (V) after ``burn_in`` seconds, one per trajectory.

    The last NAND is simulated exactly with its inputs held at the upstream
    steady-state voltages; each trajectory starts from the mean-field steady
    state of that gate.  ``burn_in=None`` waits ``BURN_IN_RC`` node
    relaxation times, long enough for the charge spread to equilibrate.
    """
    if isinstance(net, NandParams):
        net = XorNetlist.uniform(net)
    gate = _output_gate(net, ab)
    so = steady_output(gate)
    if burn_in is None:
        burn_in = BURN_IN_RC * relaxation_time(gate)
    m = nand_model(gate)
    cp = np.array([burn_in * m.gamma])
    out = np.empty(n_samples)
    for i in range(n_samples):
        rng = stream(seed, i)
        s0 = _start(rng, so.distribution)
        res = K.ssa_nand(m.eps, m.mu_d, m.mu_s, m.cap, m.dot_fw, m.dot_bw, s0,
                         so.v_out / m.v_t, cp[0], rng, False, False, cp)
        out[i] = res[9][0]
    return out * m.v_t


@dataclass(frozen=True)
class OutputStats:
    count: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    bin_edges: np.ndarray
    counts: np.ndarray
    samples: np.ndarray = field(repr=False)

    @property
    def standard_error(self) -> float:
        return float(np.sqrt(self.variance / self.count))

    def histogram_csv(self, path, header: str = "") -> None:
        rows = zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts)
        write_csv(path, ["bin_left_V", "bin_right_V", "count"], rows, header)


def output_stats(samples, bins: int = 40) -> OutputStats:
    x = np.sort(np.asarray(samples, float))    # sorted: order-insensitive sums
    counts, edges = np.histogram(x, bins=bins)
    return OutputStats(len(x), float(x.mean()), float(x.var(ddof=1)),
                       float(sps.skew(x)), float(sps.kurtosis(x)), edges, counts, x)


def output_voltage_distribution(net, ab, n_samples: int, burn_in: float | None, seed: int,
                                bins: int = 40) -> OutputStats:
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    return output_stats(output_samples(net, ab, n_samples, burn_in, seed), bins)


@dataclass(frozen=True)
class GaussianityReport:
    passed: bool
    skewness: float
    excess_kurtosis: float
    skew_tol: float
    kurtosis_tol: float


def gaussianity_check(st: OutputStats, skew_tol: float = 0.15,
                      kurtosis_tol: float = 0.3) -> GaussianityReport:
    if st.count < 1000:
        raise ValueError("gaussianity check needs at least 1000 samples")
    ok = abs(st.skewness) < skew_tol and abs(st.excess_kurtosis) < kurtosis_tol
    return GaussianityReport(bool(ok), st.skewness, st.excess_kurtosis, skew_tol, kurtosis_tol)


def simulate_ctmc(generator, initial: int, horizon: float, seed: int,
                  max_events: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Gillespie run of a fixed generator (column convention).

    Returns jump times and the state entered at each jump; the process
    starts in ``initial`` at time 0.
    """
    D = np.asarray(generator, float)
    n = D.shape[0]
    rng = stream(seed)
    rates = D - np.diag(np.diag(D))
    exit_ = rates.sum(axis=0)
    times, states = [], []
    t, s = 0.0, int(initial)
    while max_events is None or len(times) < max_events:
        if exit_[s] <= 0:
            break
        t += rng.exponential(1.0 / exit_[s])
        if t >= horizon:
            break
        s = int(np.searchsorted(np.cumsum(rates[:, s]), rng.random() * exit_[s], side="right"))
        s = min(s, n - 1)
        times.append(t)
        states.append(s)
    return np.array(times), np.array(states, dtype=np.int64)
