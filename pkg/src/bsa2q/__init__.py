"""Best separable approximation of two-qubit density matrices.

Decomposes an arbitrary two-qubit state into a maximal-weight separable
part plus a pure entangled remainder, exposes the companion spectra the
construction relies on, and verifies the optimality conditions of any
proposed decomposition.
"""

from .bsa import (
    AmbiguousSolution,
    Decomposition,
    NoAdmissibleSolution,
    Path,
    ProductVectorWitness,
    VerificationReport,
    Witnesses,
    bsa_degenerate,
    bsa_full_rank,
    bsa_rank3,
    compute,
    entanglement_measure,
    psi_from_phi,
    verify_theorem1,
)
from .mat4 import (
    PAULI_Y,
    SPIN_FLIP,
    ConvergenceFailure,
    EigenPair,
    NotHermitian,
    general_eig,
    hermitian_eig,
    min_eigenvalue,
)
from .qstate import (
    DensityMatrix,
    InvalidDensityMatrix,
    InvalidRank,
    NotEntangled,
    NotNormalized,
    PureState,
    SchmidtForm,
    SeparabilityResult,
    concurrence_mixed,
    concurrence_pure,
    concurrence_spectrum,
    is_maximally_entangled,
    is_separable,
    partial_transpose_a,
    partial_transpose_b,
    random_density,
    random_max_entangled,
    random_pure,
    random_su2,
    schmidt,
)
from .solver import (
    Admissibility,
    CandidateSolution,
    SolverConfig,
    ls_oracle,
    residual_rank3,
    solve_multistart,
)
from .spectra import SpectralReport, build_X, build_Y, spectral_report

__version__ = "0.1.0"

__all__ = [
    "AmbiguousSolution",
    "Admissibility",
    "CandidateSolution",
    "ConvergenceFailure",
    "Decomposition",
    "DensityMatrix",
    "EigenPair",
    "InvalidDensityMatrix",
    "InvalidRank",
    "NoAdmissibleSolution",
    "NotEntangled",
    "NotHermitian",
    "NotNormalized",
    "PAULI_Y",
    "Path",
    "ProductVectorWitness",
    "PureState",
    "SchmidtForm",
    "SeparabilityResult",
    "SolverConfig",
    "SPIN_FLIP",
    "SpectralReport",
    "VerificationReport",
    "Witnesses",
    "bsa_degenerate",
    "bsa_full_rank",
    "bsa_rank3",
    "build_X",
    "build_Y",
    "compute",
    "concurrence_mixed",
    "concurrence_pure",
    "concurrence_spectrum",
    "entanglement_measure",
    "general_eig",
    "hermitian_eig",
    "is_maximally_entangled",
    "is_separable",
    "ls_oracle",
    "min_eigenvalue",
    "partial_transpose_a",
    "partial_transpose_b",
    "psi_from_phi",
    "random_density",
    "random_max_entangled",
    "random_pure",
    "random_su2",
    "residual_rank3",
    "schmidt",
    "solve_multistart",
    "spectral_report",
    "verify_theorem1",
]
