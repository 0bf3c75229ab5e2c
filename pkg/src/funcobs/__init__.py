"""Functional observability, detectability and sensor placement for linear systems."""

__version__ = "0.1.0"

from funcobs.errors import (
    FuncObsError,
    InvalidInputError,
    NotDiagonalizableError,
    NumericalDegeneracyError,
    UnsupportedError,
)
from funcobs.functional import (
    FunctionalReport,
    ModalRow,
    PbhRow,
    analyze,
    is_functionally_detectable,
    is_functionally_observable,
    modal_functional_observability,
    modal_functional_observability_jordan,
    observability_decomposition,
    pbh_functional_check,
)
from funcobs.linking import DynamicGraph, PatternMatrix, max_linking_size, unit_rows
from funcobs.numeric import (
    DEFAULT_POLICY,
    PRIME,
    RankPolicy,
    SpectralData,
    SystemTriple,
    eigendecompose_diagonalizable,
    observability_matrix,
    prime_field_rank,
    rank,
    real_jordan_form,
)
from funcobs.placement import (
    PlacementProblem,
    PlacementResult,
    approximation_bound,
    brute_force_optimum,
    construct_min_C,
    greedy_place,
    min_sensor_count_diagonalizable,
    objective_f,
    objective_fbar,
    objective_fd,
    objective_gbar,
)
from funcobs.structural import (
    PatternTriple,
    SfoReport,
    generic_obs_rank,
    is_sfo,
    is_structurally_observable,
    target_controllability_bracket,
    target_controllable_nminus1,
)

__all__ = [name for name in dir() if not name.startswith("_")]
