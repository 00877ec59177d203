"""Secrecy-rate-maximizing relay beamforming for cognitive radio networks.

Amplify-and-forward relays assist a source-destination pair in the presence
of an eavesdropper while respecting interference limits at primary users.
Three weight designs are provided: the semidefinite-relaxation optimum with
a two-dimensional quasiconvex search, and two null-space schemes (eavesdropper
null space; joint eavesdropper + primary null space, with a closed form).
"""

from .channel import (
    ChannelRealization,
    DerivedChannel,
    FeasibilityReport,
    InterferenceLimit,
    PowerConstraint,
    SolveResult,
    Violation,
    check_feasible,
    derive_channel,
    interference,
    make_solve_result,
    secrecy_rate,
    snr_destination,
    snr_eavesdropper,
)
from .linalg import (
    HermitianEig,
    generalized_eig_max,
    hermitian_eig,
    null_space_basis,
    psd_sqrt,
)
from .nullspace import (
    NullSpaceContext,
    build_context,
    solve_bne,
    solve_bnep_closed_form,
    solve_bnep_sdp,
)
from .optimal import (
    PrimaryUser,
    SearchParams,
    achieved_ratios,
    build_feasibility_problem,
    solve_optimal,
    solve_optimal_multi_pu,
    t_bounds,
)
from .sdp import (
    LinearConstraint,
    SdpNumericalError,
    SdpProblem,
    SdpSolution,
    SdpStatus,
    feasible,
    gaussian_randomization,
    rank_one_extract,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "DerivedChannel",
    "PowerConstraint",
    "InterferenceLimit",
    "SolveResult",
    "Violation",
    "FeasibilityReport",
    "derive_channel",
    "snr_destination",
    "snr_eavesdropper",
    "interference",
    "secrecy_rate",
    "check_feasible",
    "make_solve_result",
    "HermitianEig",
    "hermitian_eig",
    "generalized_eig_max",
    "null_space_basis",
    "psd_sqrt",
    "SdpProblem",
    "SdpSolution",
    "SdpStatus",
    "SdpNumericalError",
    "LinearConstraint",
    "solve",
    "feasible",
    "rank_one_extract",
    "gaussian_randomization",
    "SearchParams",
    "PrimaryUser",
    "build_feasibility_problem",
    "t_bounds",
    "achieved_ratios",
    "solve_optimal",
    "solve_optimal_multi_pu",
    "NullSpaceContext",
    "build_context",
    "solve_bne",
    "solve_bnep_sdp",
    "solve_bnep_closed_form",
    "__version__",
]
