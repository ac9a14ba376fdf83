"""Probability tables over outcome tuples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NEG_CLAMP = 1e-9
MASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProbTable:
    """Nonnegative table indexed by outcome tuples ``(q_1, ..., q_arity)``.

    ``values[q1, q2]`` is the probability of outcome ``q1`` at the first
    time and ``q2`` at the second. ``mass`` is the declared total: 1 for a
    full distribution, the branch probability for a postselected one.
    Entries down to ``-NEG_CLAMP`` are treated as rounding and clamped.
    """

    values: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim < 1:
            raise ValueError("probability table needs at least one index")
        if not np.all(np.isfinite(v)):
            raise ValueError("probability table has non-finite entries")
        if v.min() < -NEG_CLAMP:
            raise ValueError(f"probability table has negative entry {v.min():.3g}")
        v[v < 0] = 0.0
        total = v.sum()
        if abs(total - self.mass) > MASS_TOL:
            raise ValueError(f"table sums to {total:.12g}, declared mass {self.mass:.12g}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def arity(self) -> int:
        return self.values.ndim

    @property
    def outcome_dim(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def reshape(self, *shape) -> "ProbTable":
        return ProbTable(self.values.reshape(*shape), self.mass)

    def allclose(self, other: "ProbTable", atol: float = 1e-9) -> bool:
        return self.values.shape == other.values.shape and bool(
            np.allclose(self.values, other.values, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return f"ProbTable(arity={self.arity}, mass={self.mass:.6g}, values={self.values.tolist()})"
