"""Sectioned key-value run configuration with unit-suffixed keys."""
from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .efficiency import ParityParams
from .errors import ConfigError
from .ga import GaConfig
from .network import XorNetlist
from .physics import LevelMap, NandParams, PhysicalConstants

EXPERIMENTS = ("xor-energy", "xor-mi", "ier-optimize", "error-sweep",
               "parity-efficiency", "gillespie-validate")

_D = LevelMap()
# (section, key) -> (type, default, doc); None default means "unset"
SCHEMA: dict[tuple[str, str], tuple[type, Any, str]] = {
    ("physics", "temperature_K"): (float, 300.0, "temperature"),
    ("physics", "boltzmann_J_per_K"): (float, 1.380649e-23, "Boltzmann constant"),
    ("physics", "charge_C"): (float, 1.602176634e-19, "carrier charge"),
    ("gate", "vd_VT"): (float, None, "supply in thermal voltages (default 15)"),
    ("gate", "vd_V"): (float, None, "supply in volts"),
    ("gate", "vs_V"): (float, 0.0, "ground rail"),
    ("gate", "cg_F"): (float, 1.62e-16, "output load capacitance"),
    ("gate", "cg_u_F"): (float, None, "load of node u (default cg_F)"),
    ("gate", "cg_v_F"): (float, None, "load of node v (default cg_F)"),
    ("gate", "cg_w_F"): (float, None, "load of node w (default cg_F)"),
    ("gate", "alpha"): (float, 0.2, "threshold factor"),
    ("gate", "gamma_per_s"): (float, 1e12, "rate constant"),
    ("gate", "eps0_p_kT"): (float, _D.eps0_p_kT, "P on-state margin below mu_d"),
    ("gate", "eps0_n_kT"): (float, _D.eps0_n_kT, "N on-state margin above mu_s"),
    ("gate", "lever_arm"): (float, _D.lever_arm, "gate lever arm kappa"),
    ("gate", "max_bose_factor"): (float, _D.max_bose_factor, "island hop rate cap / Gamma"),
    ("inputs", "pa"): (float, 0.5, "P(a=0)"),
    ("inputs", "pb"): (float, 0.5, "P(b=0)"),
    ("inputs", "pc"): (float, 0.5, "P(c=0)"),
    ("run", "experiment"): (str, None, "experiment name"),
    ("run", "seed"): (int, 0, "master seed"),
    ("run", "jobs"): (int, 1, "concurrent workers"),
    ("run", "out_dir"): (str, "results", "output directory"),
    ("sweep", "variable"): (str, None, "swept key, e.g. vd_VT"),
    ("sweep", "start"): (float, None, "first value"),
    ("sweep", "stop"): (float, None, "last value"),
    ("sweep", "points"): (int, None, "number of points"),
    ("ga", "population"): (int, 80, ""),
    ("ga", "generations"): (int, 100, ""),
    ("ga", "gene_bits"): (int, 10, ""),
    ("ga", "mutation"): (float, 0.001, "per-bit flip probability"),
    ("ga", "crossover"): (float, 0.8, "single-point crossover probability"),
    ("ga", "tournament"): (int, 2, "tournament size"),
    ("ga", "elitism"): (int, 1, "elite count"),
    ("ga", "vd_min_VT"): (float, 4.0, ""),
    ("ga", "vd_max_VT"): (float, 6.0, ""),
    ("gillespie", "samples"): (int, 10000, "output samples per branch"),
    ("gillespie", "trajectories"): (int, 10000, "ensemble size for the ME comparison"),
    ("gillespie", "burn_in_inv_gamma"): (float, None,
                                          "burn-in in 1/Gamma (default 5 node RC times)"),
    ("gillespie", "bins"): (int, 40, "histogram bins"),
    ("gillespie", "skew_tol"): (float, 0.15, ""),
    ("gillespie", "kurtosis_tol"): (float, 0.3, ""),
}

_NON_RESULT = {("run", "jobs"), ("run", "out_dir")}

# sweepable keys and their section
SWEEPABLE = {k: s for (s, k) in SCHEMA if s in ("physics", "gate", "inputs")
             and k not in ("vd_V",)}

# default sweep per experiment when [sweep] is absent
DEFAULT_SWEEP = {
    "error-sweep": ("vd_VT", 3.0, 6.0, 31),
    "parity-efficiency": ("vd_VT", 5.0, 15.0, 2),
}


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    points: int

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.points - 1)
        return [self.start + i * step for i in range(self.points)]


@dataclass(frozen=True)
class RunConfig:
    values: tuple[tuple[tuple[str, str], Any], ...]   # fully resolved, schema order

    def get(self, section: str, key: str):
        return dict(self.values)[(section, key)]

    def with_value(self, section: str, key: str, value) -> "RunConfig":
        d = dict(self.values)
        if (section, key) not in SCHEMA:
            raise ConfigError(f"unknown key [{section}] {key}")
        d[(section, key)] = value
        if key in ("vd_VT", "vd_V") and value is not None:
            d[(section, "vd_V" if key == "vd_VT" else "vd_VT")] = None
        return _resolve(d)

    @property
    def experiment(self) -> str:
        return self.get("run", "experiment")

    @property
    def seed(self) -> int:
        return self.get("run", "seed")

    @property
    def sweep(self) -> Sweep | None:
        var = self.get("sweep", "variable")
        if var is None:
            return None
        return Sweep(var, self.get("sweep", "start"), self.get("sweep", "stop"),
                     self.get("sweep", "points"))

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.get("physics", "boltzmann_J_per_K"),
                                 self.get("physics", "charge_C"),
                                 self.get("physics", "temperature_K"))

    def vd_over_vt(self) -> float:
        vd = self.get("gate", "vd_V")
        if vd is not None:
            return vd / self.constants().thermal_voltage
        vt = self.get("gate", "vd_VT")
        return 15.0 if vt is None else vt

    def nand_params(self) -> NandParams:
        g = lambda k: self.get("gate", k)   # noqa: E731
        c = self.constants()
        return NandParams(v_d=self.vd_over_vt() * c.thermal_voltage, v_s=g("vs_V"),
                          c_g=g("cg_F"), gamma=g("gamma_per_s"), alpha=g("alpha"),
                          constants=c,
                          levels=LevelMap(g("eps0_p_kT"), g("eps0_n_kT"), g("lever_arm"),
                                          g("max_bose_factor")))

    def netlist(self) -> XorNetlist:
        p = self.nand_params()
        loads = [self.get("gate", k) for k in ("cg_u_F", "cg_v_F", "cg_w_F")]
        return XorNetlist(tuple(replace(p, c_g=c if c is not None else p.c_g)
                                for c in loads) + (p,))

    def parity(self) -> ParityParams:
        return ParityParams(*(self.get("inputs", k) for k in ("pa", "pb", "pc")))

    def ga_config(self) -> GaConfig:
        g = lambda k: self.get("ga", k)     # noqa: E731
        return GaConfig(g("gene_bits"), g("population"), g("generations"), g("mutation"),
                        g("crossover"), g("tournament"), g("elitism"),
                        (g("vd_min_VT"), g("vd_max_VT")), seed=self.seed)

    def snapshot(self, *, results_only: bool = False) -> str:
        """Canonical text form; loading it gives back an equal RunConfig.

        ``results_only`` drops the keys that cannot change any output
        (worker count and output directory).
        """
        out, section = [], None
        for (s, k), v in self.values:
            if results_only and (s, k) in _NON_RESULT:
                continue
            if s != section:
                out.append(f"{'' if section is None else chr(10)}[{s}]")
                section = s
            if v is not None:
                out.append(f"{k} = {_fmt(v)}")
        return "\n".join(out) + "\n"

    def hash(self) -> str:
        """SHA-256 of the result-relevant snapshot."""
        return hashlib.sha256(self.snapshot(results_only=True).encode()).hexdigest()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _line_of(text: str, section: str, key: str) -> int | None:
    cur = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            cur = m.group(1).strip()
        elif cur == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return i
    return None


def _convert(typ, raw: str):
    if typ is str:
        return raw
    if typ is int:
        val = int(raw)
        return val
    val = float(raw)
    if not math.isfinite(val):
        raise ValueError("not finite")
    return val


def _resolve(d: dict) -> RunConfig:
    if d[("gate", "vd_VT")] is not None and d[("gate", "vd_V")] is not None:
        raise ConfigError("supply given both as vd_VT and vd_V: ambiguous")
    exp = d[("run", "experiment")]
    if exp is not None and exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; expected one of {', '.join(EXPERIMENTS)}")
    sweep = [d[("sweep", k)] for k in ("variable", "start", "stop", "points")]
    if any(x is not None for x in sweep):
        var, start, stop, pts = sweep
        if None in sweep:
            raise ConfigError("[sweep] needs variable, start, stop and points")
        if var not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {var!r}; sweepable: {', '.join(sorted(SWEEPABLE))}")
        if pts < 1:
            raise ConfigError("[sweep] points must be >= 1")
    if d[("run", "jobs")] < 1:
        raise ConfigError("jobs must be >= 1")
    return RunConfig(tuple((k, d[k]) for k in SCHEMA))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    d = {k: v[1] for k, v in SCHEMA.items()}
    for section in cp.sections():
        for key, raw in cp.items(section):
            line = _line_of(text, section, key)
            where = f"{source}:{line}" if line else source
            if (section, key) not in SCHEMA:
                raise ConfigError(f"{where}: unknown key [{section}] {key}")
            typ = SCHEMA[(section, key)][0]
            try:
                d[(section, key)] = _convert(typ, raw.strip())
            except ValueError:
                raise ConfigError(f"{where}: [{section}] {key} expects {typ.__name__}, "
                                  f"got {raw!r}") from None
    cfg = _resolve(d)
    try:   # surface physical validation errors as config errors
        cfg.nand_params()
        cfg.netlist()
        cfg.parity()
        cfg.ga_config()
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, str(p))


def default_config(experiment: str | None = None) -> RunConfig:
    d = {k: v[1] for k, v in SCHEMA.items()}
    d[("run", "experiment")] = experiment
    return _resolve(d)
