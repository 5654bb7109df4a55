"""Named batch experiments: each writes CSV tables plus a JSON run record."""
from __future__ import annotations

import datetime as _dt
import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_SWEEP, SWEEPABLE, RunConfig, Sweep
from .efficiency import EtaLandscape, ga_optimize, gaussian_channel, parity_efficiency
from .errors import ConfigError
from .gillespie import gaussianity_check, output_voltage_distribution, state_marginals
from .information import (InputDistribution, capacity, flip_probabilities, mutual_information,
                          mutual_information_reduced, noise_decomposition)
from .io import atomic_write, read_csv, write_csv
from .master import integrate, steady_output
from .network import (average_xor_energy, input_transition_matrix, switching_model_energy,
                      xor_energy_matrix)


def _header(cfg: RunConfig, what: str) -> str:
    return f"mesoxor {__version__} experiment={cfg.experiment} config_sha256={cfg.hash()} {what}"


def _points(cfg: RunConfig) -> tuple[Sweep | None, list[RunConfig]]:
    sw = cfg.sweep
    if sw is None and cfg.experiment in DEFAULT_SWEEP:
        sw = Sweep(*DEFAULT_SWEEP[cfg.experiment])
    if sw is None:
        return None, [cfg]
    return sw, [cfg.with_value(SWEEPABLE[sw.variable], sw.variable, v) for v in sw.values()]


def _run_points(fn, cfg: RunConfig, out: Path, columns: list[str]):
    """Evaluate ``fn(point_cfg) -> row`` over the sweep; each row lands in its
    own atomically renamed file before the table is assembled."""
    sw, pts = _points(cfg)
    jobs = min(cfg.get("run", "jobs"), len(pts))
    tmp = out / ".points"
    tmp.mkdir(parents=True, exist_ok=True)
    paths = [tmp / f"point_{i:04d}.csv" for i in range(len(pts))]
    args = [(fn, p, path, columns) for p, path in zip(pts, paths)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            list(ex.map(_point_job, args))
    else:
        for a in args:
            _point_job(a)
    rows = [read_csv(p)[1][0] for p in paths]
    for p in paths:
        p.unlink()
    tmp.rmdir()
    return sw, np.array(rows)


def _point_job(arg):
    fn, cfg, path, columns = arg
    write_csv(path, columns, [fn(cfg)])


# per-point evaluators --------------------------------------------------------

def _energy_row(cfg: RunConfig):
    net = cfg.netlist()
    E = xor_energy_matrix(net)
    inp = cfg.get("inputs", "pa"), cfg.get("inputs", "pb")
    avg = average_xor_energy(E, input_transition_matrix(*inp))
    p = cfg.nand_params()
    _, st_kT = switching_model_energy(0.2, p.c_g, p.v_d, p.constants)
    return [cfg.vd_over_vt(), avg, avg * p.constants.kT, st_kT, (avg - st_kT) / st_kT, E.window]


def _mi_row(cfg: RunConfig):
    net = cfg.netlist()
    W = gaussian_channel(net)
    pa, pb = cfg.get("inputs", "pa"), cfg.get("inputs", "pb")
    q = InputDistribution.factorized(pa, pb)
    cap = capacity(W)
    nd = noise_decomposition(W, q)
    return [cfg.vd_over_vt(), mutual_information(W, q), mutual_information_reduced(W, pa, pb),
            cap.bits, cap.factorized_bits, cap.factorized_pa, cap.factorized_pb,
            nd.i_in, nd.i_out, nd.noise, nd.omega]


def _error_row(cfg: RunConfig):
    p = cfg.nand_params()
    f = flip_probabilities(p.v_d - p.v_s, cfg.netlist().gates[3].c_g, p.alpha, p.constants.beta)
    return [cfg.vd_over_vt(), f.error, f.xi, f.zeta, f.erase_low]


def _parity_row(cfg: RunConfig):
    pt = parity_efficiency(cfg.netlist(), cfg.parity())
    return [pt.vd_over_vt, pt.mutual_information, pt.energy, pt.efficiency]


# experiments -----------------------------------------------------------------

def _xor_energy(cfg, out):
    net = cfg.netlist()
    E = xor_energy_matrix(net)
    P = input_transition_matrix(cfg.get("inputs", "pa"), cfg.get("inputs", "pb"))
    E.to_csv(out / "energy_matrix.csv", _header(cfg, "E(prev,next)"))
    P.to_csv(out / "transition_matrix.csv", _header(cfg, "P(prev,next)"))
    cols = ["vd_over_VT", "energy_kT", "energy_J", "switching_model_kT", "relative_deviation",
            "window_s"]
    _, rows = _run_points(_energy_row, cfg, out, cols)
    write_csv(out / "xor_energy.csv", cols, rows, _header(cfg, "average energy per operation"))
    return {"average_energy_kT": rows[:, 1].tolist(), "switching_model_kT": rows[:, 3].tolist(),
            "window_s": E.window}


def _xor_mi(cfg, out):
    gaussian_channel(cfg.netlist()).to_csv(out / "channel_matrix.csv",
                                           _header(cfg, "p(y|ab)"))
    cols = ["vd_over_VT", "mi_bits", "mi_reduced_bits", "capacity_bits",
            "factorized_capacity_bits", "best_pa", "best_pb", "i_in_bits", "i_out_bits",
            "noise_bits", "omega_bits"]
    _, rows = _run_points(_mi_row, cfg, out, cols)
    write_csv(out / "xor_mi.csv", cols, rows, _header(cfg, "mutual information"))
    return {"mi_bits": rows[:, 1].tolist(), "capacity_bits": rows[:, 3].tolist()}


def _ier(cfg, out):
    land = EtaLandscape(cfg.netlist())
    res = ga_optimize(cfg.ga_config(), land.net, land, jobs=cfg.get("run", "jobs"))
    res.trace_csv(out / "ga_trace.csv", _header(cfg, "GA convergence"))
    b = res.best
    write_csv(out / "ga_best.csv", ["vd_over_VT", "pa", "pb", "mi_bits", "energy_kT", "eta"],
              [[b.vd_over_vt, b.p_a, b.p_b, b.mutual_information, b.average_energy, b.eta]],
              _header(cfg, "best individual"))
    return {"best_eta": b.eta, "best_vd_over_VT": b.vd_over_vt, "best_pa": b.p_a,
            "best_pb": b.p_b, "evaluations": res.evaluations,
            "distinct_supplies": len(land)}


def _error_sweep(cfg, out):
    cols = ["vd_over_VT", "error_probability", "xi", "zeta", "erasure_low"]
    _, rows = _run_points(_error_row, cfg, out, cols)
    write_csv(out / "error_sweep.csv", cols, rows, _header(cfg, "readout error vs supply"))
    return {"error_probability": rows[:, 1].tolist()}


def _parity(cfg, out):
    cols = ["vd_over_VT", "mi_bits", "energy_kT", "eta"]
    _, rows = _run_points(_parity_row, cfg, out, cols)
    write_csv(out / "parity_efficiency.csv", cols, rows, _header(cfg, "parity efficiency"))
    res = {"eta": rows[:, 3].tolist()}
    if len(rows) >= 2:
        res["ratio_first_to_last"] = float(rows[0, 3] / rows[-1, 3])
    return res


def _gillespie(cfg, out):
    net = cfg.netlist()
    g = lambda k: cfg.get("gillespie", k)   # noqa: E731
    burn = g("burn_in_inv_gamma")
    burn = None if burn is None else burn / net.gates[3].gamma
    kT, c_y = net.constants.kT, net.gates[3].c_g
    rows = []
    for label, ab, expect in (("xor0", "00", net.v_s), ("xor1", "01", net.v_d)):
        st = output_voltage_distribution(net, ab, g("samples"), burn, cfg.seed, g("bins"))
        rep = gaussianity_check(st, g("skew_tol"), g("kurtosis_tol"))
        st.histogram_csv(out / f"histogram_{label}.csv", _header(cfg, f"output {label}"))
        rows.append([int(ab[0]) ^ int(ab[1]), st.count, st.mean, expect, st.standard_error,
                     st.variance, kT / c_y, st.skewness, st.excess_kurtosis, int(rep.passed)])
    cols = ["xor_value", "count", "mean_V", "expected_V", "stderr_V", "variance_V2",
            "model_variance_V2", "skewness", "excess_kurtosis", "gaussian_pass"]
    write_csv(out / "gillespie_output.csv", cols, rows, _header(cfg, "output statistics"))

    # ensemble versus master equation on NAND1 switching 11 -> 00
    p = net.gates[0]
    s0 = steady_output(p.with_inputs(p.v_d, p.v_d))
    gate = p.with_inputs(p.v_s, p.v_s)
    cps = np.array([1.0, 5.0, 20.0]) / p.gamma
    emp = state_marginals(gate, s0.distribution, s0.v_out, cps, g("trajectories"), cfg.seed)
    tv = []
    for k, t in enumerate(cps):
        tr = integrate(gate, s0.distribution, s0.v_out, t)
        tv.append([t, 0.5 * np.abs(emp[k] - tr.distributions[-1]).sum()])
    write_csv(out / "gillespie_vs_master.csv", ["checkpoint_s", "tv_distance"], tv,
              _header(cfg, "ensemble vs master equation"))
    return {"means_V": [r[2] for r in rows], "gaussian_pass": [r[-1] for r in rows],
            "tv": [r[1] for r in tv]}


RUNNERS = {
    "xor-energy": _xor_energy,
    "xor-mi": _xor_mi,
    "ier-optimize": _ier,
    "error-sweep": _error_sweep,
    "parity-efficiency": _parity,
    "gillespie-validate": _gillespie,
}


def run_experiment(cfg: RunConfig, out_dir=None) -> dict:
    """Run ``cfg.experiment``; writes data files and ``run_record.json``."""
    if cfg.experiment not in RUNNERS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    out = Path(out_dir if out_dir is not None else cfg.get("run", "out_dir"))
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    results = RUNNERS[cfg.experiment](cfg, out)
    record = {
        "artifact": "mesoxor",
        "version": __version__,
        "experiment": cfg.experiment,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "config_sha256": cfg.hash(),
        "config": cfg.snapshot(),
        "results": results,
        "files": sorted(p.name for p in out.glob("*.csv")),
        "wall_clock_s": time.perf_counter() - t0,
    }
    atomic_write(out / "run_record.json", json.dumps(record, indent=2, default=float) + "\n")
    return record
