"""Ternary-output XOR channel from the Gaussian node-voltage model."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import log_ndtr, ndtr

from .errors import NumericalError
from .io import LABELS, write_matrix

__all__ = [
    "OUTPUTS", "ChannelMatrix", "InputDistribution", "NoiseDecomposition",
    "FlipProbabilities", "AsymptoticFlip", "Capacity", "flip_probabilities",
    "asymptotic_flip_probabilities", "channel_from_gaussian", "mutual_information",
    "mutual_information_reduced", "capacity", "noise_decomposition", "entropy",
    "binary_entropy", "symmetric_flip_channel",
]

OUTPUTS = ("y0", "y1", "yE")


@dataclass(frozen=True)
class ChannelMatrix:
    """p(y | ab): rows 00, 01, 10, 11; columns 0, 1, erasure."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, float)
        if p.shape != (4, 3):
            raise ValueError("channel must be 4x3")
        if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("channel rows must be probability vectors")
        object.__setattr__(self, "p", p)

    def to_csv(self, path, header: str = "") -> None:
        write_matrix(path, self.p, header, col_labels=OUTPUTS, corner="ab")


@dataclass(frozen=True)
class InputDistribution:
    """(p00, p01, p10, p11)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, float)
        if p.shape != (4,) or np.any(p < -1e-15) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("input distribution must lie on the 4-simplex")
        object.__setattr__(self, "p", np.clip(p, 0.0, None))

    @classmethod
    def factorized(cls, p_a: float, p_b: float) -> "InputDistribution":
        """P(a=0) = p_a and P(b=0) = p_b, independent."""
        if not (0 <= p_a <= 1 and 0 <= p_b <= 1):
            raise ValueError("probabilities must lie in [0, 1]")
        return cls(np.outer([p_a, 1 - p_a], [p_b, 1 - p_b]).ravel())

    @classmethod
    def uniform(cls) -> "InputDistribution":
        return cls(np.full(4, 0.25))


@dataclass(frozen=True)
class NoiseDecomposition:
    i_in: float
    i_out: float
    noise: float
    omega: float


def _plogp(p):
    p = np.asarray(p, float)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def entropy(p) -> float:
    return float(-_plogp(p).sum())


def binary_entropy(x: float) -> float:
    return entropy([x, 1.0 - x])


def _as_p(x):
    return np.asarray(getattr(x, "p", x), float)


def mutual_information(channel, inputs) -> float:
    """I(AB; Y) = sum p(ab) p(y|ab) log2 p(y|ab)/p(y) in bits."""
    W, q = _as_p(channel), _as_p(inputs)
    py = q @ W
    joint = q[:, None] * W
    nz = (W > 0) & (py[None, :] > 0)
    lr = np.zeros_like(W)
    lr[nz] = np.log2(W[nz]) - np.log2(np.broadcast_to(py, W.shape)[nz])
    return float(max(0.0, (joint * lr).sum()))


def mutual_information_reduced(channel, p_a: float, p_b: float) -> float:
    """Two-class form of the mutual information for factorized inputs.

    The XOR channel sees only a^b, so the four input rows collapse into the
    classes {00, 11} and {01, 10}; class masses are the column sums of the
    joint input-transition matrix.  Requires rows 00 = 11 and 01 = 10.
    """
    from .network import input_transition_matrix
    W = _as_p(channel)
    if not (np.allclose(W[0], W[3], rtol=0, atol=1e-15)
            and np.allclose(W[1], W[2], rtol=0, atol=1e-15)):
        raise ValueError("reduced form needs an XOR-symmetric channel")
    pab = input_transition_matrix(p_a, p_b).p.sum(axis=0)
    w0, w1 = pab[0] + pab[3], pab[1] + pab[2]
    py = w0 * W[0] + w1 * W[1]
    total = 0.0
    for w, row in ((w0, W[0]), (w1, W[1])):
        nz = (row > 0) & (py > 0)
        total += w * float((row[nz] * (np.log2(row[nz]) - np.log2(py[nz]))).sum())
    return max(0.0, total)


def noise_decomposition(channel, inputs) -> NoiseDecomposition:
    W, q = _as_p(channel), _as_p(inputs)
    i_out = entropy(q @ W)
    noise = float(-(q[:, None] * _plogp(W)).sum())
    return NoiseDecomposition(entropy(q), i_out, noise, i_out - noise)


@dataclass(frozen=True)
class FlipProbabilities:
    """Readout probabilities of the two Gaussian branches.

    ``xi`` = P(read 1 | mean 0); ``zeta`` = P(read not-1 | mean v_d);
    ``erase_low`` / ``erase_high`` are the erasure-band masses;
    ``read0_high`` = P(read 0 | mean v_d).  ``log_*`` are natural logs, exact
    even where the probabilities underflow.
    """

    xi: float
    zeta: float
    erase_low: float
    erase_high: float
    read0_high: float
    log_xi: float
    log_zeta: float
    sigma: float

    @property
    def error(self) -> float:
        """Probability of not reading the correct level, averaged over branches."""
        return 0.5 * ((self.xi + self.erase_low) + self.zeta)


def _sigma(c_g, beta):
    if c_g <= 0 or beta <= 0:
        raise ValueError("c_g and beta must be positive")
    return math.sqrt(1.0 / (beta * c_g))


def flip_probabilities(v_d: float, c_g: float, alpha: float, beta: float) -> FlipProbabilities:
    """Exact Gaussian tails for node noise of variance kT / c_g (volts squared).

    Thresholds: read 0 at or below ``alpha v_d``, read 1 at or above
    ``(1 - alpha) v_d``, erasure in between.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    if v_d < 0:
        raise ValueError("v_d must be nonnegative")
    sigma = _sigma(c_g, beta)
    a = alpha * v_d / sigma           # distance to the near threshold
    b = (1.0 - alpha) * v_d / sigma   # distance to the far threshold
    qa, qb = ndtr(-a), ndtr(-b)
    band = max(0.0, qa - qb)
    return FlipProbabilities(
        xi=float(qb), zeta=float(qa), erase_low=float(band), erase_high=float(band),
        read0_high=float(qb), log_xi=float(log_ndtr(-b)), log_zeta=float(log_ndtr(-a)),
        sigma=sigma)


@dataclass(frozen=True)
class AsymptoticFlip:
    """Closed-form large-argument tail approximations.

    ``xi_complement`` is ``1 - xi``; ``xi`` and ``zeta``
    are the tail terms, ``log_*`` their natural logs and ``exponent_*`` the
    bare exponents ``-beta C (1-alpha)^2 v_d^2`` and ``-beta C alpha^2 v_d^2``.
    """

    xi: float
    zeta: float
    xi_complement: float
    log_xi: float
    log_zeta: float
    exponent_xi: float
    exponent_zeta: float


def asymptotic_flip_probabilities(v_d: float, c_g: float, alpha: float,
                                  beta: float) -> AsymptoticFlip:
    if not 0.0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    if v_d <= 0:
        raise ValueError("asymptotic forms need v_d > 0")
    bc = beta * c_g
    pre = 2.0 * math.sqrt(math.pi * bc)
    ex_xi = -bc * ((1.0 - alpha) * v_d) ** 2
    ex_zeta = -bc * (alpha * v_d) ** 2
    log_xi = ex_xi - math.log(pre * (1.0 - alpha) * v_d)
    log_zeta = ex_zeta - math.log(pre * alpha * v_d)
    xi = math.exp(log_xi)
    return AsymptoticFlip(xi, math.exp(log_zeta), 1.0 - xi, log_xi, log_zeta, ex_xi, ex_zeta)


def channel_from_gaussian(v_d: float, c_g: float, alpha: float, beta: float) -> ChannelMatrix:
    """Rows 00/11 read the mean-0 Gaussian, rows 01/10 the mean-v_d one."""
    f = flip_probabilities(v_d, c_g, alpha, beta)
    low = np.array([1.0 - f.zeta, f.xi, f.erase_low])          # P(v<=a) = 1 - Q(a)
    high = np.array([f.read0_high, 1.0 - f.zeta, f.erase_high])
    return ChannelMatrix(np.vstack([low, high, high, low]))


def symmetric_flip_channel(flip: float, erasure: float = 0.0) -> ChannelMatrix:
    """XOR channel that misreads with probability ``flip`` and erases with ``erasure``."""
    ok = 1.0 - flip - erasure
    low, high = [ok, flip, erasure], [flip, ok, erasure]
    return ChannelMatrix(np.array([low, high, high, low]))


@dataclass(frozen=True)
class Capacity:
    bits: float
    inputs: InputDistribution
    factorized_bits: float
    factorized_pa: float
    factorized_pb: float
    iterations: int


def capacity(channel, *, rtol: float = 1e-9, max_iter: int = 100_000,
             grid: int = 41) -> Capacity:
    """Blahut-Arimoto capacity over the 4-simplex, plus the best product input.

    Iterates until the upper and lower capacity bounds agree to ``rtol``
    (relative, absolute below 1e-12 bits).
    """
    W = _as_p(channel)
    q = np.full(4, 0.25)
    lo = hi = 0.0
    for it in range(1, max_iter + 1):
        py = q @ W
        nz = (W > 0) & (py[None, :] > 0)
        lr = np.zeros_like(W)
        lr[nz] = np.log(W[nz]) - np.log(np.broadcast_to(py, W.shape)[nz])
        d = (W * lr).sum(axis=1)                # KL(W_x || p_y), nats
        lo = float(q @ d)
        hi = float(d.max())
        if hi - lo <= rtol * max(hi, 1e-3):
            break
        q = q * np.exp(d - d.max())
        q /= q.sum()
    else:
        raise NumericalError(f"Blahut-Arimoto not converged: bounds [{lo}, {hi}] nats")
    bits = lo / math.log(2)

    # product inputs: coarse grid then bounded local polish
    xs = np.linspace(0.0, 1.0, grid)
    best = max(((mutual_information(W, InputDistribution.factorized(a, b)), a, b)
                for a in xs for b in xs))
    res = minimize(lambda z: -mutual_information(W, InputDistribution.factorized(*z)),
                   x0=[best[1], best[2]], bounds=[(0, 1), (0, 1)], method="L-BFGS-B")
    fbits, fa, fb = best
    if -res.fun > fbits:
        fbits, (fa, fb) = float(-res.fun), map(float, res.x)
    return Capacity(bits, InputDistribution(q), float(fbits), float(fa), float(fb), it)
