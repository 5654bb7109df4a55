"""Binary-coded genetic algorithm (elitist, tournament selection)."""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class GaConfig:
    gene_length_bits: int = 10
    population: int = 80
    generations: int = 100
    mutation_probability: float = 0.001
    crossover_probability: float = 0.8
    tournament_size: int = 2
    elitism: int = 1
    vd_bounds_vt: tuple[float, float] = (4.0, 6.0)
    pa_bounds: tuple[float, float] = (0.0, 1.0)
    pb_bounds: tuple[float, float] = (0.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.gene_length_bits < 1 or self.population < 2 or self.generations < 1:
            raise ValueError("gene length, population and generations must be positive")
        if not 0 <= self.mutation_probability <= 1 or not 0 <= self.crossover_probability <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
        if not 1 <= self.tournament_size <= self.population:
            raise ValueError("bad tournament size")
        if not 0 <= self.elitism < self.population:
            raise ValueError("bad elitism count")
        for lo, hi in self.bounds:
            if not lo <= hi:
                raise ValueError("bounds must be ordered")

    @property
    def bounds(self) -> tuple[tuple[float, float], ...]:
        return (self.vd_bounds_vt, self.pa_bounds, self.pb_bounds)


@dataclass(frozen=True)
class GaTrace:
    best: np.ndarray       # per generation, best fitness in the population
    mean: np.ndarray
    best_x: np.ndarray     # decoded variables of that individual


@dataclass(frozen=True)
class GaRun:
    x: np.ndarray
    fitness: float
    chromosome: int
    trace: GaTrace
    evaluations: int


class FitnessCache:
    """Chromosome-keyed memo, safe for concurrent readers and writers."""

    def __init__(self, fn: Callable[[np.ndarray], float]):
        self._fn = fn
        self._store: dict[int, float] = {}
        self._lock = threading.Lock()

    def __call__(self, key: int, x: np.ndarray) -> float:
        with self._lock:
            if key in self._store:
                return self._store[key]
        val = float(self._fn(x))
        with self._lock:
            self._store.setdefault(key, val)
        return val

    def __len__(self):
        return len(self._store)


def decode(bits: np.ndarray, bounds: Sequence[tuple[float, float]], nbits: int) -> np.ndarray:
    """Map 0/1 genes (MSB first) to points on a (2^nbits)-level grid per variable."""
    w = 1 << np.arange(nbits - 1, -1, -1)
    k = bits.reshape(*bits.shape[:-1], len(bounds), nbits) @ w
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return lo + (hi - lo) * k / ((1 << nbits) - 1)


def _key(bits: np.ndarray) -> int:
    return int("".join("1" if b else "0" for b in bits), 2)


def run_ga(fitness: Callable[[np.ndarray], float], bounds: Sequence[tuple[float, float]],
           cfg: GaConfig, cache: FitnessCache | None = None,
           evaluate_many: Callable | None = None) -> GaRun:
    """Maximize ``fitness`` over the box ``bounds``.

    ``evaluate_many(list_of_x) -> list_of_values`` may be supplied to evaluate
    the uncached members of a generation concurrently.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    nb = cfg.gene_length_bits
    L = nb * len(bounds)
    cache = cache if cache is not None else FitnessCache(fitness)
    pop = rng.integers(0, 2, size=(cfg.population, L), dtype=np.int8)
    best_hist, mean_hist, x_hist = [], [], []
    elite_bits, elite_fit = None, -np.inf

    def evaluate(P):
        keys = [_key(b) for b in P]
        xs = decode(P, bounds, nb)
        if evaluate_many is not None:
            todo = {}
            for k, x in zip(keys, xs):
                if k not in cache._store and k not in todo:
                    todo[k] = x
            if todo:
                vals = evaluate_many(list(todo.values()))
                with cache._lock:
                    for k, v in zip(todo, vals):
                        cache._store.setdefault(k, float(v))
        return np.array([cache(k, x) for k, x in zip(keys, xs)])

    fit = evaluate(pop)
    for gen in range(cfg.generations):
        order = np.argsort(-fit, kind="stable")
        ib = order[0]
        if fit[ib] > elite_fit:
            elite_fit, elite_bits = float(fit[ib]), pop[ib].copy()
        best_hist.append(fit[ib])
        mean_hist.append(fit.mean())
        x_hist.append(decode(pop[ib], bounds, nb))
        if gen == cfg.generations - 1:
            break
        children = [pop[i].copy() for i in order[:cfg.elitism]]
        while len(children) < cfg.population:
            par = []
            for _ in range(2):
                cand = rng.integers(0, cfg.population, size=cfg.tournament_size)
                par.append(pop[cand[np.argmax(fit[cand])]])
            c1, c2 = par[0].copy(), par[1].copy()
            if rng.random() < cfg.crossover_probability:
                cut = int(rng.integers(1, L))
                c1[cut:], c2[cut:] = par[1][cut:], par[0][cut:]
            for c in (c1, c2):
                flip = rng.random(L) < cfg.mutation_probability
                c[flip] ^= 1
                if len(children) < cfg.population:
                    children.append(c)
        pop = np.array(children, dtype=np.int8)
        fit = evaluate(pop)
    trace = GaTrace(np.array(best_hist), np.array(mean_hist), np.array(x_hist))
    return GaRun(decode(elite_bits, bounds, nb), elite_fit, _key(elite_bits), trace, len(cache))
