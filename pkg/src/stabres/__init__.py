"""Resonance extraction from real stabilization data.

Workflow: diagonalize a model over a real scaling grid (stabilization),
find flat windows between avoided crossings, fit a rational continued
fraction to each window, continue it to complex scaling, and locate the
stationary points that expose resonance energies and widths. A direct
uniform-complex-scaling path re-derives every quantity independently for
cross-checking.
"""

from .config import DEFAULT, Config, load_config
from .continuation import (
    BranchPointEstimate,
    NotFoundResult,
    StationaryPoint,
    Trajectory,
    alpha_trajectory,
    delta_gap,
    find_stationary,
    puiseux_fit,
    theta_trajectory,
)
from .errors import (
    CrossingGuardError,
    DegenerateDataError,
    IllConditionedOverlapError,
    MigrationError,
    NonConvergenceError,
    NumericError,
    NumericRangeError,
    SchemaError,
    StabresError,
    TrackingAmbiguityError,
    TrajectoryDegenerateError,
    ValidationError,
)
from .hamiltonian import (
    BasisSet,
    BasisSpec,
    ComplexMatrixPair,
    ModelSpec,
    ScalingParameter,
    build_basis,
    quadrature_self_test,
    scaled_matrices,
)
from .eigensolver import EigenSet, eig, match_order, overlap_matrix, track_nearest
from .schlessinger import (
    ContinuedFraction,
    FitDiagnostics,
    PadeValue,
    PoleMarker,
    diagnose,
    evaluate,
    fit,
    fit_window,
)
from .session import (
    Session,
    import_stabilization,
    landscape_csv,
    load_session,
    save_session,
    session_to_json,
    stabilization_csv,
    trajectory_csv,
)
from .stabilization import (
    AvoidedCrossing,
    StabilizationData,
    StableWindow,
    detect_windows,
    sweep,
    window_points,
)
from .ucs import (
    DerivativeLandscape,
    RotationFit,
    UcsStationaryPoint,
    UcsSweep,
    derivative_landscape,
    exponent_estimate,
    model_matrix_fn,
    pair_samples,
    refine_branch_point,
    rotation_slope,
    ucs_stationary,
    ucs_sweep,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
