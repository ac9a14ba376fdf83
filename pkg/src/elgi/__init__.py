"""Entropic Leggett-Garg inequality simulations.

Joint-probability measurement protocols on small spin registers, Shannon
entropy witnesses, the information deficit ``D_n(theta)``, finite-shot
emulation, and a linear-feasibility test for a grand distribution.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .entropy import (
    DeficitReport,
    bc_chain_check,
    conditional_entropy,
    deficit_sweep,
    info_deficit,
    joint_entropy,
    shannon,
)
from .macrorealism import (
    FeasibilityResult,
    MarginalSet,
    grand_feasibility,
    markov_baseline,
    mismatch_curve,
    quantum_marginal_set,
)
from .protocols import (
    MeasurementMode,
    ProtocolConfig,
    analytic_joint2,
    analytic_joint3,
    encode_check,
    joint2_circuit,
    joint3_circuit,
    marginalize,
    sep_probabilities,
)
from .qcore import DensityMatrix, rotation_unitary, spin_operators
from .sampling import Estimate, ShotConfig, estimate_deficit, sigma_violation
from .tables import ProbTable
