"""Von Neumann pointer measurements on pre- and post-selected quantum systems."""

from .core import (
    HermitianOperator,
    Observable,
    PathSet,
    PureState,
    evolve,
    path_amplitudes,
    path_probabilities,
    relative_amplitudes,
    strong_mean,
    transition_amplitude,
    weak_value,
    weak_value_of_paths,
)
from .errors import (
    ForbiddenTransition,
    NoOpenPath,
    NumericalError,
    RegimeError,
    ValidationError,
    WeakValueError,
)
from .pointer import (
    MeasurementSetup,
    MeterConfig,
    PointerStatistics,
    mean_pointer_shift,
    mean_pointer_shift_quadrature,
    pointer_density,
    postselect_norm,
    scaling_equivalence_check,
    sweep_width,
)
from .sampling import classify_strong, empirical_stats, sample_pointer
from .solver import TargetProblem, near_orthogonal_amplification, solve_postselection, verify_target

__version__ = "0.1.0"

__all__ = [
    "HermitianOperator",
    "Observable",
    "PathSet",
    "PureState",
    "evolve",
    "path_amplitudes",
    "path_probabilities",
    "relative_amplitudes",
    "strong_mean",
    "transition_amplitude",
    "weak_value",
    "weak_value_of_paths",
    "ForbiddenTransition",
    "NoOpenPath",
    "NumericalError",
    "RegimeError",
    "ValidationError",
    "WeakValueError",
    "MeasurementSetup",
    "MeterConfig",
    "PointerStatistics",
    "mean_pointer_shift",
    "mean_pointer_shift_quadrature",
    "pointer_density",
    "postselect_norm",
    "scaling_equivalence_check",
    "sweep_width",
    "classify_strong",
    "empirical_stats",
    "sample_pointer",
    "TargetProblem",
    "near_orthogonal_amplification",
    "solve_postselection",
    "verify_target",
]
