"""Information-energy ratio of the XOR, its GA optimum, and the parity circuit."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .ga import GaConfig, GaRun, FitnessCache, run_ga
from .information import (ChannelMatrix, channel_from_gaussian, mutual_information,
                          mutual_information_reduced)
from .io import write_csv
from .network import (EnergyMatrix, TransitionMatrix, XorNetlist, average_xor_energy,
                      input_transition_matrix, with_supply, xor_energy_matrix)
from .physics import NandParams

__all__ = [
    "IerPoint", "GaResult", "ParityParams", "ParityTransitions", "ParityPoint",
    "EtaLandscape", "gaussian_channel", "information_energy_ratio", "ga_optimize",
    "grid_search", "parity_transition_matrices", "parity_energy",
    "parity_conditional", "parity_mutual_information", "parity_efficiency",
]


def _netlist(x) -> XorNetlist:
    return XorNetlist.uniform(x) if isinstance(x, NandParams) else x


def gaussian_channel(net) -> ChannelMatrix:
    """Readout channel of the XOR output node, loaded by the last gate's c_g."""
    net = _netlist(net)
    g = net.gates[3]
    return channel_from_gaussian(net.v_d - net.v_s, g.c_g, g.alpha, g.constants.beta)


@dataclass(frozen=True)
class IerPoint:
    v_d: float
    vd_over_vt: float
    p_a: float
    p_b: float
    mutual_information: float
    average_energy: float
    eta: float


def _ratio(mi: float, energy: float) -> float:
    if not energy > 0:
        raise NumericalError(f"non-positive average energy {energy!r}: ratio undefined")
    return mi / energy


def information_energy_ratio(net, p_a: float, p_b: float,
                             energy: EnergyMatrix | None = None,
                             channel: ChannelMatrix | None = None) -> IerPoint:
    """eta = I(AB; Y) / E_avg in bits per kT at the netlist's supply."""
    net = _netlist(net)
    E = xor_energy_matrix(net) if energy is None else energy
    W = gaussian_channel(net) if channel is None else channel
    mi = mutual_information_reduced(W, p_a, p_b)
    e = average_xor_energy(E, input_transition_matrix(p_a, p_b))
    vt = net.constants.thermal_voltage
    return IerPoint(net.v_d, net.v_d / vt, float(p_a), float(p_b), mi, e, _ratio(mi, e))


class EtaLandscape:
    """eta(v_d, p_a, p_b) over supply voltages, with energy matrices cached
    per supply value (V_T units).  Safe for concurrent use."""

    def __init__(self, net):
        self.net = _netlist(net)
        self._cache: dict[float, tuple[EnergyMatrix, ChannelMatrix]] = {}
        self._lock = threading.Lock()

    def at(self, vd_over_vt: float) -> tuple[EnergyMatrix, ChannelMatrix]:
        key = float(vd_over_vt)
        with self._lock:
            hit = self._cache.get(key)
        if hit is None:
            n = with_supply(self.net, key)
            hit = (xor_energy_matrix(n), gaussian_channel(n))
            with self._lock:
                hit = self._cache.setdefault(key, hit)
        return hit

    def point(self, vd_over_vt: float, p_a: float, p_b: float) -> IerPoint:
        E, W = self.at(vd_over_vt)
        return information_energy_ratio(with_supply(self.net, vd_over_vt), p_a, p_b, E, W)

    def eta(self, x) -> float:
        return self.point(*x).eta

    def __len__(self):
        return len(self._cache)


@dataclass(frozen=True)
class GaResult:
    best: IerPoint
    generations: np.ndarray
    best_eta: np.ndarray
    mean_eta: np.ndarray
    best_params: np.ndarray     # (vd/V_T, p_a, p_b) of each generation's best
    evaluations: int
    config: GaConfig = field(repr=False)

    def trace_csv(self, path, header: str = "") -> None:
        rows = np.column_stack([self.generations, self.best_eta, self.mean_eta,
                                self.best_params])
        write_csv(path, ["generation", "best_eta", "mean_eta", "best_vd_over_VT",
                         "best_pa", "best_pb"],
                  [(int(r[0]), *r[1:]) for r in rows], header)


def ga_optimize(config: GaConfig, net, landscape: EtaLandscape | None = None,
                jobs: int = 1) -> GaResult:
    """Maximize eta over (v_d, p_a, p_b) with the binary GA."""
    land = landscape if landscape is not None else EtaLandscape(net)
    many = None
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        def many(xs):
            # warm the energy cache for distinct supplies first, in parallel
            with ThreadPoolExecutor(jobs) as ex:
                list(ex.map(land.at, sorted({float(x[0]) for x in xs})))
            return [land.eta(x) for x in xs]
    run: GaRun = run_ga(land.eta, config.bounds, config, FitnessCache(land.eta), many)
    best = land.point(*run.x)
    g = np.arange(len(run.trace.best))
    return GaResult(best, g, run.trace.best, run.trace.mean, run.trace.best_x,
                    run.evaluations, config)


def grid_search(landscape: EtaLandscape, vd_points: int = 33, p_points: int = 21,
                vd_bounds=(4.0, 6.0)) -> tuple[IerPoint, np.ndarray]:
    """Exhaustive eta on a regular grid; returns the best point and the grid."""
    vds = np.linspace(*vd_bounds, vd_points)
    ps = np.linspace(0.0, 1.0, p_points)
    grid = np.empty((vd_points, p_points, p_points))
    for i, v in enumerate(vds):
        for j, a in enumerate(ps):
            for k, b in enumerate(ps):
                grid[i, j, k] = landscape.eta((v, a, b))
    i, j, k = np.unravel_index(np.argmax(grid), grid.shape)
    return landscape.point(vds[i], ps[j], ps[k]), grid


# parity circuit ---------------------------------------------------------------

@dataclass(frozen=True)
class ParityParams:
    """P(a=0), P(b=0), P(c=0) of i.i.d. inputs."""

    p_a: float
    p_b: float
    p_c: float

    def __post_init__(self):
        for x in (self.p_a, self.p_b, self.p_c):
            if not 0.0 <= x <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class ParityTransitions:
    xor1: TransitionMatrix
    xor2: TransitionMatrix
    lambdas: np.ndarray     # (l1, l2, l3, l4)


def parity_transition_matrices(p: ParityParams) -> ParityTransitions:
    """Input-transition weights of both XORs of the parity circuit.

    The first stage sees (a, b) directly.  The second sees (y1, c) with y1
    the ideal first-stage output; lambda_k weight the four y1 transitions
    0->0, 0->1, 1->0 and 1->1, and lambda_4 closes the simplex.
    """
    q0 = p.p_a * p.p_b + (1 - p.p_a) * (1 - p.p_b)     # P(a^b = 0)
    q1 = 1.0 - q0
    l1, l2, l3 = q0 * q0, q0 * q1, q1 * q0
    lam = np.array([l1, l2, l3, 1.0 - l1 - l2 - l3])
    pc = np.array([p.p_c, 1.0 - p.p_c])
    cc = np.outer(pc, pc)
    blocks = lam.reshape(2, 2)
    P2 = np.kron(blocks, np.ones((2, 2))) * np.tile(cc, (2, 2))
    return ParityTransitions(input_transition_matrix(p.p_a, p.p_b), TransitionMatrix(P2), lam)


def parity_energy(E, tr: ParityTransitions, E2=None) -> float:
    """Sum of E * P_XOR1 + E2 * P_XOR2 (E2 defaults to E), in kT."""
    e1 = np.asarray(getattr(E, "kT", E), float)
    e2 = e1 if E2 is None else np.asarray(getattr(E2, "kT", E2), float)
    return float((e1 * tr.xor1.p).sum() + (e2 * tr.xor2.p).sum())


def parity_conditional(channel, channel2=None) -> np.ndarray:
    """p(y | abc), rows abc = 000..111, columns (0, 1, erasure).

    The second XOR reads (y1, c); an erased y1 yields an erased output.
    """
    W1 = np.asarray(getattr(channel, "p", channel), float)
    W2 = W1 if channel2 is None else np.asarray(getattr(channel2, "p", channel2), float)
    out = np.zeros((8, 3))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                row = out[4 * a + 2 * b + c]
                w = W1[2 * a + b]
                for y1 in range(2):
                    row += w[y1] * W2[2 * y1 + c]
                row[2] += w[2]
    return out


def parity_mutual_information(channel, p: ParityParams, channel2=None) -> float:
    """I(ABC; Y) over the 8 x 3 joint table, in bits."""
    pa = np.array([p.p_a, 1 - p.p_a])
    pb = np.array([p.p_b, 1 - p.p_b])
    pc = np.array([p.p_c, 1 - p.p_c])
    q = np.einsum("i,j,k->ijk", pa, pb, pc).ravel()
    return mutual_information(parity_conditional(channel, channel2), q)


@dataclass(frozen=True)
class ParityPoint:
    vd_over_vt: float
    mutual_information: float
    energy: float
    efficiency: float


def parity_efficiency(net, p: ParityParams, energy: EnergyMatrix | None = None) -> ParityPoint:
    """Bits per kT of the two-XOR parity circuit (both XORs identical)."""
    net = _netlist(net)
    E = xor_energy_matrix(net) if energy is None else energy
    mi = parity_mutual_information(gaussian_channel(net), p)
    e = parity_energy(E, parity_transition_matrices(p))
    return ParityPoint(net.v_d / net.constants.thermal_voltage, mi, e, _ratio(mi, e))
