"""Measurement protocols for single-time and joint probabilities.

Each measurement at rotation angle ``theta_k`` is done in the rotating
basis: back-evolve the system by ``U(theta_k)^dagger``, copy its
computational-basis value onto a fresh ancilla with a (anti-)CNOT, then
forward-evolve by ``U(theta_k)``. The final measurement skips the copy and
the forward evolution. All coherences are dephased once, just before the
diagonal readout.

Register order is ``system, ancilla_1, ..., ancilla_{n-1}``, so a readout
diagonal reshaped to ``(2,) * n`` is indexed ``[q_n, a_1, ..., a_{n-1}]``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qcore import (
    DensityMatrix,
    dephase,
    diag_probabilities,
    kron,
    maximally_mixed,
    partial_trace,
    rotation_unitary,
    spin_dim,
)
from .tables import ProbTable

__all__ = [
    "MeasurementMode",
    "Polarity",
    "ProtocolConfig",
    "sep_probabilities",
    "cnot",
    "controlled_flip",
    "encode_check",
    "circuit_readout",
    "joint_circuit",
    "joint2_circuit",
    "joint3_circuit",
    "ancilla_joint2",
    "analytic_joint2",
    "analytic_joint3",
    "analytic_joint",
    "joint2",
    "joint3",
    "marginalize",
]


class MeasurementMode(enum.Enum):
    CNOT = "cnot"
    ANTI_CNOT = "anticnot"
    INRM = "inrm"
    ANALYTIC = "analytic"

    @classmethod
    def parse(cls, value) -> "MeasurementMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for mode in cls:
            if mode.value == key:
                return mode
        choices = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown measurement mode {value!r} (choose from {choices})")

    @property
    def is_circuit(self) -> bool:
        return self is not MeasurementMode.ANALYTIC


class Polarity(enum.Enum):
    ON_ONE = "on_one"  # standard CNOT: flip the ancilla when the system reads 1
    ON_ZERO = "on_zero"  # anti-CNOT: flip when the system reads 0

    @property
    def flip_value(self) -> int:
        return 1 if self is Polarity.ON_ONE else 0


@dataclass(frozen=True)
class ProtocolConfig:
    """Spin, measurement angles ``theta_k = omega * t_k`` and readout mode.

    Angles must be monotone in time order. They are usually increasing;
    they decrease when ``omega < 0``. Equal neighbours mean zero evolution.
    """

    s: float
    angles: tuple
    mode: MeasurementMode = MeasurementMode.INRM

    def __post_init__(self):
        spin_dim(self.s)
        angles = tuple(float(a) for a in self.angles)
        if not all(np.isfinite(angles)):
            raise ValueError("angles must be finite")
        steps = np.diff(angles)
        if np.any(steps < 0) and np.any(steps > 0):
            raise ValueError(f"angles must be monotone in time order, got {angles}")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "mode", MeasurementMode.parse(self.mode))

    @property
    def dim(self) -> int:
        return spin_dim(self.s)


def _require_qubit(s) -> None:
    if spin_dim(s) != 2:
        raise ValueError(f"circuit protocols need a qubit system (s = 1/2), got s = {s}")


def sep_probabilities(rho_s: DensityMatrix, theta_i: float, s=None) -> ProbTable:
    """Single-time probabilities ``P(q_i)`` of a spin state measured at ``theta_i``."""
    if s is None:
        s = (rho_s.dim - 1) / 2
    if spin_dim(s) != rho_s.dim:
        raise ValueError(f"state dimension {rho_s.dim} does not match spin {s}")
    u = rotation_unitary(s, theta_i)
    return diag_probabilities(dephase(rho_s.evolve(u.conj().T)))


def controlled_flip(n_qubits: int, control: int, target: int, polarity=Polarity.ON_ONE) -> np.ndarray:
    """Permutation matrix flipping ``target`` when ``control`` holds the polarity's value."""
    polarity = Polarity(polarity)
    if control == target or not (0 <= control < n_qubits and 0 <= target < n_qubits):
        raise ValueError("control and target must be distinct qubits of the register")
    dim = 2**n_qubits
    perm = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits)]
        if bits[control] == polarity.flip_value:
            bits[target] ^= 1
        out = int("".join(map(str, bits)), 2)
        perm[out, idx] = 1.0
    return perm


def cnot(polarity=Polarity.ON_ONE) -> np.ndarray:
    """4x4 gate on ``system (x) ancilla``; ``ON_ZERO`` gives the anti-CNOT."""
    return controlled_flip(2, 0, 1, polarity)


def encode_check(rho_s: DensityMatrix) -> ProbTable:
    """Copy a qubit's populations onto a blank ancilla and read them back.

    The ancilla diagonal equals the system diagonal; coherences of the
    system do not leak into it.
    """
    _require_qubit((rho_s.dim - 1) / 2)
    joint = DensityMatrix(kron(rho_s.matrix, np.diag([1.0, 0.0])))
    encoded = joint.evolve(cnot(Polarity.ON_ONE))
    return diag_probabilities(partial_trace(encoded, [2, 2], keep=[1]))


@lru_cache(maxsize=64)
def _gates(n_qubits: int, polarities: tuple) -> tuple:
    return tuple(controlled_flip(n_qubits, 0, k + 1, p) for k, p in enumerate(polarities))


def _run_circuit(s, angles, polarities, rho_s: DensityMatrix | None, final_readout: bool) -> DensityMatrix:
    _require_qubit(s)
    n_anc = len(angles) - 1 if final_readout else len(angles)
    if len(polarities) != n_anc:
        raise ValueError(f"need {n_anc} polarities, got {len(polarities)}")
    if rho_s is None:
        rho_s = maximally_mixed(2)
    if rho_s.dim != 2:
        raise ValueError("system state must be a single qubit")
    n = n_anc + 1
    blank = np.zeros((2**n_anc, 2**n_anc))
    blank[0, 0] = 1.0
    rho = DensityMatrix(kron(rho_s.matrix, blank))
    eye_anc = np.eye(2**n_anc)
    gates = _gates(n, tuple(Polarity(p) for p in polarities))
    # between measurements only the net system evolution U(theta_k)^dag U(theta_{k-1}) matters
    prev = 0.0
    for k in range(n_anc):
        step = rotation_unitary(s, angles[k] - prev).conj().T
        rho = rho.evolve(kron(step, eye_anc))
        rho = rho.evolve(gates[k])
        prev = angles[k]
    if final_readout:
        step = rotation_unitary(s, angles[-1] - prev).conj().T
        rho = rho.evolve(kron(step, eye_anc))
    return rho


def circuit_readout(s, angles, polarities, rho_s: DensityMatrix | None = None) -> ProbTable:
    """Dephased diagonal of the measurement circuit, shaped ``(2,) * len(angles)``.

    Axis 0 is the system's final outcome; axis ``k`` is ancilla ``k``.
    """
    rho = _run_circuit(s, tuple(angles), tuple(polarities), rho_s, final_readout=True)
    return diag_probabilities(dephase(rho)).reshape((2,) * len(angles))


def joint_circuit(s, angles, mode, rho_s: DensityMatrix | None = None) -> ProbTable:
    """``P(q_1, ..., q_n)`` from the ancilla-assisted circuit.

    CNOT / ANTI_CNOT use a single run in which every ancilla records its
    outcome. INRM runs every combination of CNOT and anti-CNOT and, from
    each run, keeps only the branch where no ancilla flipped; the kept
    branches tile the outcome space. The result is not renormalized.
    """
    mode = MeasurementMode.parse(mode)
    if not mode.is_circuit:
        raise ValueError("joint_circuit needs a circuit mode")
    n = len(angles)
    if n < 2:
        raise ValueError("joint probabilities need at least two measurement times")
    out = np.zeros((2,) * n)
    if mode is MeasurementMode.INRM:
        for pols in itertools.product((Polarity.ON_ONE, Polarity.ON_ZERO), repeat=n - 1):
            diag = circuit_readout(s, angles, pols, rho_s).values
            # unflipped ancillas: earlier outcomes are those that leave each gate idle
            earlier = tuple(1 - p.flip_value for p in pols)
            out[earlier] = diag[(slice(None),) + (0,) * (n - 1)]
    else:
        pol = Polarity.ON_ONE if mode is MeasurementMode.CNOT else Polarity.ON_ZERO
        diag = circuit_readout(s, angles, (pol,) * (n - 1), rho_s).values
        for idx in itertools.product((0, 1), repeat=n):
            anc = tuple(q ^ (1 - pol.flip_value) for q in idx[:-1])
            out[idx] = diag[(idx[-1],) + anc]
    return ProbTable(out, out.sum())


def joint2_circuit(config: ProtocolConfig, i: int = 0, j: int = 1, rho_s: DensityMatrix | None = None) -> ProbTable:
    """Two-time table ``P(q_i, q_j)`` for positions ``i < j`` of ``config.angles``."""
    if not (0 <= i < j < len(config.angles)):
        raise ValueError(f"need 0 <= i < j < {len(config.angles)}, got i={i}, j={j}")
    if not config.mode.is_circuit:
        return analytic_joint2(config.s, config.angles[j] - config.angles[i])
    _require_qubit(config.s)
    return joint_circuit(config.s, (config.angles[i], config.angles[j]), config.mode, rho_s)


def joint3_circuit(config: ProtocolConfig, rho_s: DensityMatrix | None = None) -> ProbTable:
    """Three-time table ``P(q_1, q_2, q_3)`` with two ancilla qubits."""
    if len(config.angles) != 3:
        raise ValueError(f"three-time protocol needs 3 angles, got {len(config.angles)}")
    if not config.mode.is_circuit:
        return analytic_joint3(config.s, *config.angles)
    _require_qubit(config.s)
    return joint_circuit(config.s, config.angles, config.mode, rho_s)


def ancilla_joint2(config: ProtocolConfig, rho_s: DensityMatrix | None = None) -> ProbTable:
    """Two-time table stored entirely in two ancillas, system traced out.

    Runs the first two measurements of the three-time circuit with standard
    CNOTs and no final system readout.
    """
    if len(config.angles) < 2:
        raise ValueError("need at least two angles")
    angles = tuple(config.angles[:2])
    rho = _run_circuit(config.s, angles, (Polarity.ON_ONE,) * 2, rho_s, final_readout=False)
    anc = partial_trace(rho, [2, 2, 2], keep=[1, 2])
    return diag_probabilities(dephase(anc)).reshape(2, 2)


def _transition(s, theta: float) -> np.ndarray:
    """``T[a, b] = |<b| U(theta) |a>|^2``: row-stochastic transition between outcomes."""
    u = rotation_unitary(s, theta)
    return np.abs(u.T) ** 2


def analytic_joint(s, angles) -> ProbTable:
    """Projective-collapse chain from a maximally mixed spin-``s`` state."""
    d = spin_dim(s)
    table = np.full(d, 1.0 / d)
    for a, b in zip(angles[:-1], angles[1:]):
        t = _transition(s, b - a)
        table = table[..., :, None] * t
    return ProbTable(table, 1.0)


def analytic_joint2(s, theta_ij: float) -> ProbTable:
    """``P(m_i, m_j) = |<m_j| exp(i theta S_x) |m_i>|^2 / (2s + 1)``."""
    return analytic_joint(s, (0.0, float(theta_ij)))


def analytic_joint3(s, theta1: float, theta2: float, theta3: float) -> ProbTable:
    return analytic_joint(s, (float(theta1), float(theta2), float(theta3)))


def joint2(s, theta_ij: float, mode=MeasurementMode.ANALYTIC) -> ProbTable:
    """Two-time table for a rotation ``theta_ij`` between the measurements, any mode."""
    mode = MeasurementMode.parse(mode)
    if not mode.is_circuit:
        return analytic_joint2(s, theta_ij)
    return joint2_circuit(ProtocolConfig(s, (0.0, float(theta_ij)), mode))


def joint3(s, step1: float, step2: float, mode=MeasurementMode.ANALYTIC) -> ProbTable:
    """Three-time table for consecutive rotations ``step1`` then ``step2``."""
    config = ProtocolConfig(s, (0.0, float(step1), float(step1) + float(step2)), mode)
    return joint3_circuit(config)


_PAIRS = {(0, 1): 2, (1, 2): 0, (0, 2): 1}


def marginalize(table: ProbTable, pair) -> ProbTable:
    """Sum a three-time table down to the times in ``pair`` (0-based).

    ``pair`` is one of ``(0, 1)``, ``(1, 2)``, ``(0, 2)``.
    """
    if table.arity != 3:
        raise ValueError(f"marginalize needs an arity-3 table, got arity {table.arity}")
    pair = tuple(pair)
    if pair not in _PAIRS:
        raise ValueError(f"pair must be one of {sorted(_PAIRS)}, got {pair}")
    return ProbTable(table.values.sum(axis=_PAIRS[pair]), table.mass)
