"""Small-dimension quantum-state primitives.

Matrices are plain ``numpy`` complex arrays. Dimensions stay tiny (spin
multiplicity times a handful of ancilla qubits), so everything is dense.

Basis convention: index ``k`` of a spin-``s`` register is the ``S_z``
eigenstate with ``m = s - k``. For a qubit, ``|0>`` is ``m = +1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .tables import NEG_CLAMP, ProbTable

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
IDEMPOTENT_TOL = 1e-10

__all__ = [
    "DensityMatrix",
    "SpinOps",
    "as_spin",
    "spin_dim",
    "spin_operators",
    "expm",
    "rotation_unitary",
    "kron",
    "partial_trace",
    "dephase",
    "project_branch",
    "diag_probabilities",
    "maximally_mixed",
    "pure_state",
]


def as_spin(s) -> Fraction:
    """Return ``s`` as an exact half-integer, or raise ``ValueError``."""
    try:
        twice = Fraction(s).limit_denominator(1000) * 2
    except (TypeError, ValueError) as exc:
        raise ValueError(f"spin must be a number, got {s!r}") from exc
    if twice.denominator != 1 or abs(float(twice) - 2 * float(s)) > 1e-12:
        raise ValueError(f"spin must be a half-integer, got {s!r}")
    if twice <= 0:
        raise ValueError(f"spin must be positive, got {s!r}")
    return twice / 2


def spin_dim(s) -> int:
    return int(2 * as_spin(s)) + 1


@dataclass(frozen=True)
class SpinOps:
    s: Fraction
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dim(self) -> int:
        return self.sz.shape[0]


def spin_operators(s) -> SpinOps:
    """Spin-``s`` angular momentum matrices (hbar = 1) from the ladder operators."""
    s = as_spin(s)
    sf = float(s)
    m = sf - np.arange(int(2 * s) + 1)
    # <m+1| S+ |m> = sqrt(s(s+1) - m(m+1)); row k-1 is m+1 relative to row k
    sp = np.diag(np.sqrt(sf * (sf + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    sz = np.diag(m).astype(complex)
    for a in (sx, sy, sz):
        a.setflags(write=False)
    return SpinOps(s, sx, sy, sz)


def expm(a: np.ndarray, order: int = 12) -> np.ndarray:
    """Matrix exponential by scaling and squaring a truncated Taylor series.

    The argument is scaled by ``2**-k`` until its 1-norm is at most 0.5,
    the series is summed to ``order`` terms, and the result squared ``k``
    times. Adequate for the small, well-conditioned generators used here.
    """
    a = np.asarray(a, dtype=complex)
    norm = np.abs(a).sum(axis=0).max() if a.size else 0.0
    k = 0
    if norm > 0.5:
        k = int(np.ceil(np.log2(norm / 0.5)))
    scaled = a / 2.0**k
    n = a.shape[0]
    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for j in range(1, order + 1):
        term = term @ scaled / j
        result = result + term
    for _ in range(k):
        result = result @ result
    return result


def rotation_unitary(s, theta: float) -> np.ndarray:
    """Forward evolution ``exp(i theta S_x)`` for spin ``s``."""
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    return expm(1j * float(theta) * spin_operators(s).sx)


def kron(*mats: np.ndarray) -> np.ndarray:
    return reduce(np.kron, mats)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD matrix whose trace equals ``mass`` (1 unless a branch).

    Construction validates the invariants; instances are read-only.
    """

    matrix: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if np.abs(m - m.conj().T).max(initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - self.mass) > TRACE_TOL:
            raise ValueError(f"trace {tr:.3g} does not match declared mass {self.mass:.3g}")
        if m.shape[0] and np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def evolve(self, u: np.ndarray) -> "DensityMatrix":
        return DensityMatrix(u @ self.matrix @ u.conj().T, self.mass)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim)


def pure_state(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def partial_trace(rho: DensityMatrix, dims, keep) -> DensityMatrix:
    """Reduce ``rho`` on a register with subsystem sizes ``dims`` to ``keep``.

    ``keep`` lists subsystem indices; the result orders them ascending.
    """
    dims = [int(d) for d in dims]
    n = len(dims)
    if int(np.prod(dims)) != rho.dim:
        raise ValueError(f"subsystem dims {dims} do not multiply to {rho.dim}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    t = rho.matrix.reshape(dims + dims)
    # trace out from the highest index down so remaining axis numbers stay valid
    for k in reversed(range(n)):
        if k not in keep:
            cur = t.ndim // 2
            t = np.trace(t, axis1=k, axis2=k + cur)
    d = int(np.prod([dims[k] for k in keep]))
    return DensityMatrix(t.reshape(d, d), rho.mass)


def dephase(rho: DensityMatrix) -> DensityMatrix:
    """Zero every coherence in the computational basis."""
    return DensityMatrix(np.diag(np.diag(rho.matrix)), rho.mass)


def project_branch(rho: DensityMatrix, projector: np.ndarray) -> DensityMatrix:
    """Unnormalized post-measurement branch ``P rho P``; its trace is the branch probability."""
    p = np.asarray(projector, dtype=complex)
    if p.shape != rho.matrix.shape:
        raise ValueError(f"projector shape {p.shape} does not match state {rho.matrix.shape}")
    if np.abs(p @ p - p).max() > IDEMPOTENT_TOL:
        raise ValueError("projector is not idempotent")
    out = p @ rho.matrix @ p
    return DensityMatrix(out, np.trace(out).real)


def diag_probabilities(rho: DensityMatrix) -> ProbTable:
    """Read the computational-basis populations of ``rho``.

    Entries in ``[-NEG_CLAMP, 0)`` are rounding noise and clamp to zero;
    anything more negative means an upstream bug and raises. The vector is
    not renormalized, so its sum is the branch mass.
    """
    p = np.diag(rho.matrix).real.copy()
    if p.size and p.min() < -NEG_CLAMP:
        raise ValueError(f"negative population {p.min():.3g} on the diagonal")
    p[p < 0] = 0.0
    return ProbTable(p, rho.mass)
