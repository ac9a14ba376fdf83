"""Shannon entropies in bits and the entropic Leggett-Garg information deficit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .protocols import MeasurementMode, ProtocolConfig, analytic_joint2, joint2_circuit
from .qcore import spin_dim
from .tables import MASS_TOL, NEG_CLAMP, ProbTable

VIOLATION_TOL = 1e-9
CHAIN_TOL = 1e-9

__all__ = [
    "DeficitReport",
    "ChainCheck",
    "binary_entropy",
    "shannon",
    "joint_entropy",
    "conditional_entropy",
    "bc_chain_check",
    "deficit_from_tables",
    "info_deficit",
    "deficit_sweep",
]


def _entropy_bits(values: np.ndarray) -> float:
    p = np.asarray(values, dtype=float).ravel()
    if p.min(initial=0.0) < -NEG_CLAMP:
        raise ValueError(f"negative probability {p.min():.3g}")
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _check_normalized(p: ProbTable) -> None:
    if abs(p.values.sum() - 1.0) > MASS_TOL:
        raise ValueError(f"entropy needs a normalized table, mass is {p.values.sum():.12g}")


def binary_entropy(p: float) -> float:
    return _entropy_bits([p, 1.0 - p])


def shannon(p: ProbTable) -> float:
    """``H(Q) = -sum p log2 p`` with ``0 log 0 = 0``."""
    _check_normalized(p)
    return _entropy_bits(p.values)


def joint_entropy(p: ProbTable) -> float:
    if p.arity != 2:
        raise ValueError(f"joint entropy expects a two-time table, got arity {p.arity}")
    _check_normalized(p)
    return _entropy_bits(p.values)


def conditional_entropy(p: ProbTable) -> float:
    """Mean conditional entropy ``H(Q_j | Q_i) = H(Q_i, Q_j) - H(Q_i)``.

    ``p[q_i, q_j]`` carries the earlier time on axis 0. The weights in the
    average are the probabilities ``P(q_i)``, so the result is nonnegative.
    """
    h = joint_entropy(p) - _entropy_bits(p.values.sum(axis=1))
    if h < -NEG_CLAMP:
        raise ValueError(f"conditional entropy {h:.3g} is negative")
    return max(h, 0.0)


class ChainCheck(NamedTuple):
    conditional_le_marginal: bool
    marginal_le_joint: bool
    holds: bool
    h_conditional: float
    h_marginal: float
    h_joint: float


def bc_chain_check(p: ProbTable, tol: float = CHAIN_TOL) -> ChainCheck:
    """Check ``H(Q_j|Q_i) <= H(Q_j) <= H(Q_i, Q_j)`` for a two-time table."""
    h_joint = joint_entropy(p)
    h_cond = h_joint - _entropy_bits(p.values.sum(axis=1))
    h_marg = _entropy_bits(p.values.sum(axis=0))
    left = h_cond <= h_marg + tol
    right = h_marg <= h_joint + tol
    return ChainCheck(left, right, left and right, h_cond, h_marg, h_joint)


@dataclass(frozen=True)
class DeficitReport:
    """One evaluation of ``D_n(theta)`` with the entropies behind it.

    ``deficit`` is in units of ``log2(2s + 1)``, i.e. bits for a qubit.
    """

    n: int
    s: float
    theta: float
    h_step: float
    h_total: float
    deficit: float
    violated: bool
    mode: MeasurementMode

    @property
    def step(self) -> float:
        return self.theta / (self.n - 1)


def deficit_from_tables(n: int, s, step_table: ProbTable, total_table: ProbTable):
    """``((n - 1) H_step - H_total) / log2(2s + 1)`` plus the two entropies."""
    h_step = conditional_entropy(step_table)
    h_total = conditional_entropy(total_table)
    deficit = ((n - 1) * h_step - h_total) / math.log2(spin_dim(s))
    return deficit, h_step, h_total


def info_deficit(n: int, s, theta: float, mode=MeasurementMode.ANALYTIC) -> DeficitReport:
    """Information deficit for ``n`` equally spaced measurements spanning rotation ``theta``.

    Circuit modes simulate the ancilla protocol and support only a qubit
    with ``n = 3``; the analytic mode handles any ``n >= 3`` and spin.
    """
    mode = MeasurementMode.parse(mode)
    n = int(n)
    if n < 3:
        raise ValueError(f"need at least 3 measurements, got n={n}")
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    theta = float(theta)
    step = theta / (n - 1)
    if mode.is_circuit:
        if n != 3 or spin_dim(s) != 2:
            raise ValueError(f"mode {mode.value} supports only n=3 with s=1/2 (got n={n}, s={s})")
        config = ProtocolConfig(s, (0.0, step, theta), mode)
        step_table = joint2_circuit(config, 0, 1)
        total_table = joint2_circuit(config, 0, 2)
    else:
        step_table = analytic_joint2(s, step)
        total_table = analytic_joint2(s, theta)
    deficit, h_step, h_total = deficit_from_tables(n, s, step_table, total_table)
    return DeficitReport(
        n=n,
        s=float(s),
        theta=theta,
        h_step=h_step,
        h_total=h_total,
        deficit=deficit,
        violated=deficit < -VIOLATION_TOL,
        mode=mode,
    )


def deficit_sweep(n: int, s, theta_grid, mode=MeasurementMode.ANALYTIC) -> list[DeficitReport]:
    grid = list(theta_grid)
    if not grid:
        raise ValueError("theta grid is empty")
    return [info_deficit(n, s, t, mode) for t in grid]
