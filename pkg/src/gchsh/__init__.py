"""Device-independent fidelity bounds for generalized CHSH tests.

The package certifies how close an unknown bipartite state is to the
two-qubit maximally entangled state, given only the score it achieves in a
one-parameter family of CHSH-like tests. The main entry points are
`compute_curve` (build the certified bound curve for one test), `bound_at`
(evaluate it at an observed score), and `select` (pick the best test in the
family for observed correlators).
"""

from .bell import (
    TSIRELSON_BOUND,
    FrameQuantities,
    bell_operator,
    chsh_coefficient_matrix,
    frame_quantities,
    local_bound,
    observables,
    score_from_correlators,
    validate_angle,
    validate_theta,
)
from .bounds import (
    DEFAULT_KAPPA,
    DEFAULT_MARGIN,
    THETA_MAX,
    THETA_MIN,
    BoundCurve,
    ScoreSweep,
    bound_at,
    compute_curve,
    load_alice_grids,
    load_table,
    save_table,
    slope,
    sweep_scores,
    trivial_score,
    validate_supported_theta,
)
from .config import TOLS, Tolerances
from .errors import (
    GchshError,
    InfeasibleScoreError,
    SweepIncompleteError,
    TableError,
    TableIncompleteError,
    TableVersionError,
)
from .linalg import (
    SQRT2,
    check_density_matrix,
    check_pure_state,
    eig_hermitian,
    fidelity_with_pure,
    is_hermitian,
    pauli,
    phi_plus,
    require_hermitian,
    tensor,
)
from .maps import (
    AliceMapParams,
    AliceParamGrid,
    FrameEvaluation,
    QubitChannel,
    alice_channel,
    apply_product_channel,
    bob_channel,
    dephasing_channel,
    frame_fidelities,
    gamma_direction,
    identity_channel,
    optimize_alice_params,
    strength_g,
    strength_g_tilde,
)
from .optimizer import (
    AngleMinimum,
    AngleSearchConfig,
    certified_min,
    guidance_potential,
    min_fidelity_over_angles,
)
from .sdp import SdpInstance, SdpResult, feasible, pullback_objective, solve
from .selector import (
    DEFAULT_SCAN_POINTS,
    NormalizedCorrelators,
    OutsideRegionError,
    SelectionResult,
    in_region,
    mesh,
    normalize,
    region_diagnostic,
    select,
    theta_scan_grid,
)

__version__ = "0.1.0"

__all__ = [
    "AliceMapParams",
    "AliceParamGrid",
    "AngleMinimum",
    "AngleSearchConfig",
    "BoundCurve",
    "DEFAULT_KAPPA",
    "DEFAULT_MARGIN",
    "DEFAULT_SCAN_POINTS",
    "FrameEvaluation",
    "FrameQuantities",
    "GchshError",
    "InfeasibleScoreError",
    "NormalizedCorrelators",
    "OutsideRegionError",
    "QubitChannel",
    "SQRT2",
    "ScoreSweep",
    "SdpInstance",
    "SdpResult",
    "SelectionResult",
    "SweepIncompleteError",
    "THETA_MAX",
    "THETA_MIN",
    "TOLS",
    "TSIRELSON_BOUND",
    "TableError",
    "TableIncompleteError",
    "TableVersionError",
    "Tolerances",
    "alice_channel",
    "apply_product_channel",
    "bell_operator",
    "bob_channel",
    "bound_at",
    "certified_min",
    "check_density_matrix",
    "check_pure_state",
    "chsh_coefficient_matrix",
    "compute_curve",
    "dephasing_channel",
    "eig_hermitian",
    "feasible",
    "fidelity_with_pure",
    "frame_fidelities",
    "frame_quantities",
    "gamma_direction",
    "guidance_potential",
    "identity_channel",
    "in_region",
    "is_hermitian",
    "load_alice_grids",
    "load_table",
    "local_bound",
    "mesh",
    "min_fidelity_over_angles",
    "normalize",
    "observables",
    "optimize_alice_params",
    "pauli",
    "phi_plus",
    "pullback_objective",
    "region_diagnostic",
    "require_hermitian",
    "save_table",
    "score_from_correlators",
    "select",
    "slope",
    "solve",
    "strength_g",
    "strength_g_tilde",
    "sweep_scores",
    "tensor",
    "theta_scan_grid",
    "trivial_score",
    "validate_angle",
    "validate_supported_theta",
    "validate_theta",
]
