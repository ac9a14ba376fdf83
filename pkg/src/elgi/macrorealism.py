"""Legitimacy of pairwise joint probabilities and a classical baseline.

A set of two-time tables is *legitimate* when a single distribution over
all three times reproduces every one of them as a marginal. Deciding that
is a linear feasibility problem, solved here with a phase-1 simplex.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .protocols import MeasurementMode, analytic_joint2, analytic_joint3, joint2, marginalize
from .tables import ProbTable

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
BORDERLINE_FACTOR = 10.0
CONSISTENCY_TOL = 1e-9
PIVOT_TOL = 1e-12

__all__ = [
    "MarginalSet",
    "FeasibilityResult",
    "phase1_simplex",
    "marginal_constraints",
    "grand_feasibility",
    "quantum_marginal_set",
    "markov_baseline",
    "mismatch_curve",
]


@dataclass(frozen=True)
class MarginalSet:
    """Two-time tables ``P(q1,q2)``, ``P(q2,q3)``, ``P(q1,q3)`` with shared single-time marginals."""

    p12: ProbTable
    p23: ProbTable
    p13: ProbTable

    def __post_init__(self):
        tables = (self.p12, self.p23, self.p13)
        if any(t.arity != 2 for t in tables):
            raise ValueError("marginal set needs three two-time tables")
        d = self.p12.outcome_dim
        if any(t.values.shape != (d, d) for t in tables):
            raise ValueError("all tables must share the outcome dimension")
        for t in tables:
            if abs(t.values.sum() - 1.0) > CONSISTENCY_TOL:
                raise ValueError("pairwise tables must be normalized")
        checks = (
            ("q1", self.p12.values.sum(axis=1), self.p13.values.sum(axis=1)),
            ("q2", self.p12.values.sum(axis=0), self.p23.values.sum(axis=1)),
            ("q3", self.p23.values.sum(axis=0), self.p13.values.sum(axis=0)),
        )
        for name, a, b in checks:
            if np.abs(a - b).max() > CONSISTENCY_TOL:
                raise ValueError(f"inconsistent single-time marginals for {name}")

    @property
    def d(self) -> int:
        return self.p12.outcome_dim

    @classmethod
    def from_grand(cls, table: ProbTable) -> "MarginalSet":
        return cls(marginalize(table, (0, 1)), marginalize(table, (1, 2)), marginalize(table, (0, 2)))


@dataclass(frozen=True)
class FeasibilityResult:
    """Verdict on a grand distribution.

    ``gap`` is the largest constraint violation of the best phase-1 point.
    ``borderline`` marks verdicts whose gap sits just above the tolerance;
    those are reported feasible but should not be trusted as hard results.
    """

    feasible: bool
    gap: float
    witness: ProbTable | None = None
    borderline: bool = False


def phase1_simplex(a: np.ndarray, b: np.ndarray, max_iter: int = 10_000):
    """Minimize the total artificial slack for ``a x = b, x >= 0``.

    Dense tableau with Bland's smallest-index rule for both the entering
    and the leaving variable, so the method cannot cycle on degenerate
    vertices. Returns ``(x, objective)`` where ``objective`` is the
    optimal sum of artificials; zero means ``x`` is feasible.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    # reduced costs of the phase-1 objective with artificials basic
    tab[m, :n] = -a.sum(axis=0)
    tab[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    for _ in range(max_iter):
        entering = next((j for j in range(n + m) if tab[m, j] < -PIVOT_TOL), None)
        if entering is None:
            break
        col = tab[:m, entering]
        rows = [i for i in range(m) if col[i] > PIVOT_TOL]
        if not rows:
            # cannot happen: the phase-1 objective is bounded below by zero
            raise RuntimeError("phase-1 objective unbounded")
        ratios = [tab[i, -1] / col[i] for i in rows]
        best = min(ratios)
        ties = [i for i, r in zip(rows, ratios) if r <= best + PIVOT_TOL]
        leave = min(ties, key=lambda i: basis[i])
        tab[leave] /= tab[leave, entering]
        for i in range(m + 1):
            if i != leave and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[leave]
        basis[leave] = entering
    else:
        raise RuntimeError("phase-1 simplex did not converge")

    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = tab[i, -1]
    return x[:n], float(-tab[m, -1])


def marginal_constraints(m: MarginalSet):
    """Equality system ``A x = b`` over the flattened grand table ``x[q1, q2, q3]``."""
    d = m.d
    idx = np.arange(d**3).reshape(d, d, d)
    rows, rhs = [], []
    for axes, table in (((0, 1), m.p12), ((1, 2), m.p23), ((0, 2), m.p13)):
        for u, v in itertools.product(range(d), repeat=2):
            sel = [slice(None)] * 3
            sel[axes[0]], sel[axes[1]] = u, v
            row = np.zeros(d**3)
            row[idx[tuple(sel)].ravel()] = 1.0
            rows.append(row)
            rhs.append(table.values[u, v])
    rows.append(np.ones(d**3))
    rhs.append(1.0)
    return np.array(rows), np.array(rhs)


def grand_feasibility(m: MarginalSet, tol: float = FEAS_TOL) -> FeasibilityResult:
    """Decide whether some distribution over ``(q1, q2, q3)`` yields all three tables."""
    a, b = marginal_constraints(m)
    x, _ = phase1_simplex(a, b)
    x[x < 0] = 0.0
    gap = float(np.abs(a @ x - b).max())
    if gap > BORDERLINE_FACTOR * tol:
        return FeasibilityResult(False, gap)
    borderline = gap > tol
    if borderline:
        log.warning("grand feasibility is borderline: residual %.3g within %gx tolerance", gap, BORDERLINE_FACTOR)
    d = m.d
    x = x / x.sum()
    return FeasibilityResult(True, gap, ProbTable(x.reshape(d, d, d)), borderline)


def quantum_marginal_set(step: float, s=0.5, mode=MeasurementMode.ANALYTIC, step2: float | None = None) -> MarginalSet:
    """Directly measured two-time tables for rotations ``step`` and ``step2`` (default equal)."""
    step2 = step if step2 is None else step2
    return MarginalSet(joint2(s, step, mode), joint2(s, step2, mode), joint2(s, step + step2, mode))


def markov_baseline(d: int, transition, n_steps: int = 2):
    """Uniform start chained through a stochastic matrix; always macrorealistic.

    Returns the full ``(n_steps + 1)``-time table and the marginal set of
    its first three times.
    """
    t = np.asarray(transition, dtype=float)
    if t.shape != (d, d):
        raise ValueError(f"transition must be {d}x{d}, got {t.shape}")
    if t.min() < 0 or np.abs(t.sum(axis=1) - 1.0).max() > 1e-12:
        raise ValueError("transition matrix must be row-stochastic")
    if n_steps < 2:
        raise ValueError("need at least two steps for a marginal set")
    table = np.full(d, 1.0 / d)
    for _ in range(n_steps):
        table = np.multiply.outer(table, np.ones(d)) * t
    full = ProbTable(table)
    first3 = table.sum(axis=tuple(range(3, table.ndim))) if table.ndim > 3 else table
    return full, MarginalSet.from_grand(ProbTable(first3))


def mismatch_curve(theta_grid, s=0.5) -> list[tuple[float, float]]:
    """``P'(0_1, 0_3) - P(0_1, 0_3)`` for equal steps ``theta``.

    ``P'`` comes from the three-time table; ``P`` is the direct two-time table
    for the total rotation ``2 theta``.
    """
    out = []
    for theta in theta_grid:
        theta = float(theta)
        p3 = analytic_joint3(s, 0.0, theta, 2 * theta)
        derived = marginalize(p3, (0, 2)).values[0, 0]
        direct = analytic_joint2(s, 2 * theta).values[0, 0]
        out.append((theta, float(derived - direct)))
    return out
