"""Finite-shot emulation of the measurement statistics.

Randomness comes from xoshiro256** seeded through SplitMix64. Every
repetition gets its own stream derived from ``(seed, rep)``, so results
do not depend on the order in which repetitions are evaluated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .entropy import deficit_from_tables
from .protocols import MeasurementMode, joint2
from .qcore import spin_dim
from .tables import ProbTable

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM = 0xD1B54A32D192ED03

DEFAULT_SHOTS = 4096
DEFAULT_REPS = 10
DEFAULT_SEED = 20130101

__all__ = [
    "Rng",
    "ShotConfig",
    "Estimate",
    "splitmix64",
    "sample_table",
    "apply_readout_noise",
    "sample_deficit",
    "estimate_deficit",
    "estimate_table",
    "sigma_violation",
]


def splitmix64(x: int) -> tuple[int, int]:
    """One SplitMix64 step: returns ``(output, next_state)``."""
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31), x


class Rng:
    """xoshiro256** stream.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    stream : int
        Index of an independent substream (the repetition number).
    """

    def __init__(self, seed: int, stream: int = 0):
        x = (int(seed) ^ ((int(stream) * _STREAM) & _MASK)) & _MASK
        words = []
        for _ in range(4):
            out, x = splitmix64(x)
            words.append(out)
        self.state = np.array(words, dtype=np.uint64)

    def random(self, n: int) -> np.ndarray:
        return _backend.uniform_doubles(int(n), self.state)

    def counts(self, probs, shots: int) -> np.ndarray:
        """Multinomial counts for ``shots`` draws from the flat distribution ``probs``."""
        p = np.asarray(probs, dtype=float).ravel()
        total = p.sum()
        if total <= 0:
            raise ValueError("cannot sample from an empty distribution")
        cdf = np.cumsum(p) / total
        # outcomes past the last nonzero entry must never be selected
        last = int(np.flatnonzero(p > 0)[-1])
        cdf[last:] = 1.0
        return _backend.multinomial_counts(np.ascontiguousarray(cdf), int(shots), self.state)


@dataclass(frozen=True)
class ShotConfig:
    shots: int = DEFAULT_SHOTS
    reps: int = DEFAULT_REPS
    seed: int = DEFAULT_SEED
    readout_flip: float = 0.0

    def __post_init__(self):
        if int(self.shots) < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")
        if int(self.reps) < 2:
            raise ValueError(f"need at least 2 repetitions for a spread estimate, got {self.reps}")
        if not 0.0 <= float(self.readout_flip) < 1.0:
            raise ValueError(f"readout flip probability must lie in [0, 1), got {self.readout_flip}")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std: float
    reps: int
    samples: tuple = ()


def sample_table(p: ProbTable, shots: int, rng: Rng) -> ProbTable:
    """Empirical frequencies of ``shots`` draws from ``p``; advances ``rng``."""
    if abs(p.values.sum() - 1.0) > 1e-9:
        raise ValueError("can only sample a normalized table")
    counts = rng.counts(p.values, shots)
    return ProbTable(counts.reshape(p.values.shape) / shots)


def apply_readout_noise(p: ProbTable, eps: float) -> ProbTable:
    """Pass every index through a symmetric channel with flip probability ``eps``.

    A flipped qubit outcome becomes the other value; for more outcomes the
    flip lands uniformly on one of the others.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"flip probability must lie in [0, 1), got {eps}")
    d = p.outcome_dim
    if eps == 0.0:
        return p
    channel = np.full((d, d), eps / (d - 1))
    np.fill_diagonal(channel, 1.0 - eps)
    v = p.values
    for axis in range(p.arity):
        v = np.moveaxis(np.tensordot(v, channel, axes=([axis], [0])), -1, axis)
    return ProbTable(v, p.mass)


def sample_deficit(theta: float, shots: int, rng: Rng, mode=MeasurementMode.INRM, s=0.5,
                   readout_flip: float = 0.0, n: int = 3) -> float:
    """One finite-shot ``D_n`` from sampled step-angle and total-angle tables."""
    step = joint2(s, theta / (n - 1), mode)
    total = joint2(s, theta, mode)
    if readout_flip:
        step = apply_readout_noise(step, readout_flip)
        total = apply_readout_noise(total, readout_flip)
    step_hat = sample_table(step, shots, rng)
    total_hat = sample_table(total, shots, rng)
    deficit, _, _ = deficit_from_tables(n, s, step_hat, total_hat)
    return deficit


def _summarize(values) -> Estimate:
    arr = np.asarray(values, dtype=float)
    return Estimate(float(arr.mean()), float(arr.std(ddof=1)), len(arr), tuple(arr.tolist()))


def estimate_deficit(theta: float, config: ShotConfig = ShotConfig(), mode=MeasurementMode.INRM,
                     s=0.5, n: int = 3, workers: int = 1) -> Estimate:
    """Mean and sample standard deviation of ``D_n`` over independent repetitions.

    Entropies are plug-in estimates from the empirical tables, with no bias
    correction; near-deterministic tables therefore read slightly high.
    """
    mode = MeasurementMode.parse(mode)
    if mode.is_circuit and (n != 3 or spin_dim(s) != 2):
        raise ValueError(f"mode {mode.value} supports only n=3 with s=1/2")

    def one(rep: int) -> float:
        return sample_deficit(theta, config.shots, Rng(config.seed, rep), mode, s, config.readout_flip, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, range(config.reps)))
    else:
        values = [one(rep) for rep in range(config.reps)]
    return _summarize(values)


def estimate_table(p: ProbTable, config: ShotConfig = ShotConfig()) -> tuple[ProbTable, np.ndarray]:
    """Mean empirical table over repetitions and the per-entry sample std."""
    if config.readout_flip:
        p = apply_readout_noise(p, config.readout_flip)
    draws = np.stack([sample_table(p, config.shots, Rng(config.seed, rep)).values for rep in range(config.reps)])
    return ProbTable(draws.mean(axis=0)), draws.std(axis=0, ddof=1)


def sigma_violation(e: Estimate) -> float:
    """How many standard deviations the mean deficit sits below zero.

    Zero when the mean is not negative. A negative mean with zero spread
    returns ``inf`` as an infinite-confidence flag.
    """
    if e.mean >= 0:
        return 0.0
    if e.std == 0:
        return math.inf
    return -e.mean / e.std
