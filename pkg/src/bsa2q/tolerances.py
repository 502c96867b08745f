"""Shared numeric tolerances.

Chosen for well-conditioned 4x4 problems in double precision; fixed at
import so every module and test pins the same thresholds.
"""

PSD_TOL = 1e-10          # PSD predicate slack on the smallest eigenvalue
EIG_TOL = 1e-10          # eigenpair residual gate
DEGENERACY_TOL = 1e-8    # eigenvalue-gap threshold, relative to |trace|
HERMITICITY_TOL = 1e-12  # max entrywise |m - m^dag| accepted as Hermitian
RANK_TOL = 1e-9          # numerical-rank eigenvalue cutoff, relative to trace
C_TOL = 1e-8             # concurrence threshold for "entangled" decisions
REPAIR_TOL = 1e-10       # constructor repair window for asymmetry / trace drift
NORM_TOL = 1e-10         # pure-state normalization repair window
RECONSTRUCTION_TOL = 1e-9  # Frobenius residual for the decomposition identity
