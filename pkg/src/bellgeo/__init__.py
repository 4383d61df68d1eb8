"""Correlation geometry toolkit for the two-party, two-setting Bell scenario."""

from .behavior import (
    CBehavior,
    DBehavior,
    InvalidBehaviorError,
    ProbabilityTable,
    chsh_values,
    is_local,
    is_valid,
    mix,
    to_probabilities,
)
from .criteria import (
    ExtremalVerdict,
    SignPattern,
    SQuantities,
    crypt_gaps,
    crypt_membership,
    d_quantities,
    extremal_criterion,
    s_quantities,
    scaled_correlators,
    tlm_gap,
    two_qubit_condition,
)
from .geometry import (
    GeometryParams,
    ReconstructionError,
    projection_angles,
    reconstruct,
    symmetry_equivalent,
    symmetry_transforms,
)
from .qbell import (
    DegenerateGeometryError,
    QBellCoefficients,
    QuantumBellInequality,
    UniquenessReport,
    chain_slacks,
    construct_pair,
    evaluate,
    uniqueness_check,
    verify_cryptographic_chain,
)
from .realization import (
    ConditionalStates,
    GeneralRealization,
    TwoQubitRealization,
    conditional_states,
    embed,
    guessing_bias,
    guessing_bias_oracle,
    haar_unitary,
    promote,
    random_general,
    random_two_qubit,
    simulate_cbehavior,
    simulate_dbehavior,
    xz_observable,
)
from .selftest import (
    DerivedOperators,
    ExtendedRealization,
    IsometryResult,
    anticommutator_residual,
    derive_operators,
    protocol_chain,
    protocol_lemma6_pair,
    protocol_zb,
    swap_isometry,
)

__version__ = "0.1.0"
