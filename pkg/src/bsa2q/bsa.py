"""Optimal decomposition of a two-qubit state into a maximal-weight
separable part plus a pure entangled remainder.

The dispatcher mirrors the algebraic recipe: a closed-form attempt through
the smallest eigenpair of the companion matrix Y (valid when the separable
part keeps full rank), a nonlinear boundary-witness solve when it does
not, and kernel-pinned variants for inputs of deficient rank.  Every
result can be audited by `verify_theorem1`, which checks the optimality
conditions directly on the proposed decomposition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .mat4 import dagger, hermitian_eig, min_eigenvalue
from .qstate import (
    DensityMatrix,
    InvalidRank,
    NotEntangled,
    PureState,
    concurrence_mixed,
    concurrence_pure,
    is_separable,
    partial_transpose_b,
)
from .solver import (
    CorollaryCandidate,
    SolverConfig,
    pinch_candidates,
    solve_corollary_rank2,
    solve_corollary_rank3,
    solve_multistart,
)
from .spectra import spectral_report
from .tolerances import C_TOL, PSD_TOL, RANK_TOL, RECONSTRUCTION_TOL

__all__ = [
    "ProductVectorWitness",
    "NoAdmissibleSolution",
    "AmbiguousSolution",
    "Path",
    "Witnesses",
    "Decomposition",
    "VerificationReport",
    "psi_from_phi",
    "bsa_full_rank",
    "bsa_rank3",
    "bsa_degenerate",
    "compute",
    "verify_theorem1",
    "entanglement_measure",
]


class ProductVectorWitness(ValueError):
    """Witness vector is a product state; its negative mode is undefined."""


class NoAdmissibleSolution(RuntimeError):
    """Multi-start solve exhausted without an admissible solution."""


class AmbiguousSolution(RuntimeError):
    """More than one distinct admissible decomposition survived filtering."""


class Path(str, enum.Enum):
    FULL_RANK = "FullRank"
    RANK3 = "Rank3"
    DEGENERATE_COROLLARY = "DegenerateCorollary"
    SEPARABLE = "Separable"


@dataclass(frozen=True)
class Witnesses:
    """Kernel witnesses and eigenvalue data attached to a decomposition."""

    phi: PureState | None = None
    phi_tilde: PureState | None = None
    alpha: float | None = None
    nu: float | None = None


@dataclass(frozen=True)
class Decomposition:
    """rho = (1 - lam) |psi><psi| + lam rho_s with lam maximal.

    `psi` is absent exactly when lam = 1 (separable input).  For a pure
    entangled input lam = 0 and `rho_s` is a documented placeholder (the
    maximally mixed state), marked by `rho_s_placeholder`.
    """

    lam: float
    psi: PureState | None
    rho_s: DensityMatrix
    path: Path
    witnesses: Witnesses
    rho_s_placeholder: bool = False


@dataclass(frozen=True)
class VerificationReport:
    """Per-condition audit of a proposed decomposition.

    Residuals: `kernel_pt_residual` = |rho_s^{T_B} phi|,
    `kernel_residual` = |rho_s phi_tilde| (0 when no phi_tilde is
    required), `eigen_residual` = |A psi + alpha psi| for the witness
    operator A.  The verdict is the conjunction of every boolean with all
    residuals under their tolerances.
    """

    kernel_pt_residual: float
    kernel_residual: float
    eigen_residual: float
    alpha_sign_ok: bool
    nu_sign_ok: bool
    c_phi_positive: bool
    reconstruction_ok: bool
    rho_s_psd: bool
    rho_s_ppt: bool
    psi_concurrence_ok: bool
    verdict: bool


def psi_from_phi(phi) -> tuple[PureState, float]:
    """Maximally entangled negative mode of the witness projector.

    Returns the eigenvector of the partial transpose of |phi><phi| at its
    lowest eigenvalue -c(phi)/2 together with alpha = c(phi)/2.  Raises
    ProductVectorWitness when phi carries no entanglement (the negative
    mode then collapses into a doubly degenerate zero).
    """
    amp = phi.amp if isinstance(phi, PureState) else np.asarray(phi, dtype=complex)
    c = concurrence_pure(PureState.normalized(amp))
    if c <= C_TOL:
        raise ProductVectorWitness(f"witness concurrence {c:.3e} below {C_TOL}")
    op = partial_transpose_b(np.outer(amp, amp.conj()))
    pairs = hermitian_eig(op)
    return PureState(pairs[0].vector), c / 2.0


def _build_rho_s(rho: DensityMatrix, lam: float, psi: PureState) -> DensityMatrix | None:
    """Assemble (rho - (1-lam)|psi><psi|)/lam if it is PSD and PPT."""
    if lam < 1e-12:
        return None
    mat = (rho.mat - (1.0 - lam) * psi.projector()) / lam
    mat = (mat + dagger(mat)) / 2.0
    if min_eigenvalue(mat) < -PSD_TOL:
        return None
    if min_eigenvalue(partial_transpose_b(mat)) < -PSD_TOL:
        return None
    return DensityMatrix(mat)


def bsa_full_rank(rho: DensityMatrix) -> Decomposition | None:
    """Closed-form attempt valid when the separable part has full rank.

    The kernel witness is the eigenvector of the companion matrix Y at its
    smallest eigenvalue gamma, and the separable weight is 1 - 2 sqrt(gamma).
    Returns None when this route does not apply (degenerate gamma, product
    witness, or a remainder that fails PSD/PPT), signalling the caller to
    fall through to the nonlinear path.
    """
    if concurrence_mixed(rho) <= C_TOL:
        raise NotEntangled("full-rank path requires an entangled state")
    if rho.rank < 4:
        raise InvalidRank("full-rank path requires a rank-4 state")
    rep = spectral_report(rho)
    if rep.degenerate_gamma:
        return None
    try:
        psi, alpha = psi_from_phi(rep.phi4)
    except ProductVectorWitness:
        return None
    mu = 2.0 * np.sqrt(rep.gamma)
    lam = 1.0 - mu
    if lam < -1e-8 or lam > 1.0 + 1e-8:
        raise RuntimeError(f"separable weight {lam!r} outside [0, 1]: eigensolver failure")
    lam = float(np.clip(lam, 0.0, 1.0))
    rho_s = _build_rho_s(rho, lam, psi)
    if rho_s is None:
        return None
    return Decomposition(
        lam=lam,
        psi=psi,
        rho_s=rho_s,
        path=Path.FULL_RANK,
        witnesses=Witnesses(phi=rep.phi4, alpha=alpha),
    )


def _witnesses_from_state(rho: DensityMatrix, lam: float, psi: PureState,
                          tol: float = 1e-8) -> tuple[Witnesses, DensityMatrix] | None:
    """Rebuild the kernel witnesses from a proposed (weight, pure part).

    The kernel vector of the separable part's partial transpose gives phi;
    the eigenvalue alpha follows from projecting the witness-operator
    condition out of the separable part's kernel, and the remaining
    kernel component determines nu and phi_tilde.  Returns None when the
    pair does not admit consistent witnesses (wrong weight, or conditions
    violated beyond `tol`).
    """
    mu = 1.0 - lam
    if lam < 1e-12:
        return None
    mat = (rho.mat - mu * psi.projector()) / lam
    mat = (mat + dagger(mat)) / 2.0
    if min_eigenvalue(mat) < -PSD_TOL:
        return None
    mat_tb = partial_transpose_b(mat)
    if min_eigenvalue(mat_tb) < -PSD_TOL:
        return None

    phi = hermitian_eig(mat_tb)[0].vector
    w, v = np.linalg.eigh(mat)
    kernel = v[:, w < RANK_TOL]
    if kernel.shape[1] == 0:
        return None

    a_vec = partial_transpose_b(np.outer(phi, phi.conj())) @ psi.amp
    proj_out = psi.amp - kernel @ (dagger(kernel) @ psi.amp)
    if np.linalg.norm(proj_out) < 1e-8:
        return None
    a_out = a_vec - kernel @ (dagger(kernel) @ a_vec)
    alpha = -float(np.real(np.vdot(proj_out, a_out))) / float(
        np.real(np.vdot(proj_out, proj_out))
    )
    y_req = -alpha * psi.amp - a_vec
    if np.linalg.norm(y_req - kernel @ (dagger(kernel) @ y_req)) > tol:
        return None
    if np.linalg.norm(y_req) <= tol:
        nu = 0.0
        phi_tilde = kernel[:, 0]
    else:
        s = complex(np.vdot(y_req, psi.amp))
        if s.real <= 1e-14 or abs(s.imag) > tol:
            return None
        nu = float(np.linalg.norm(y_req) ** 2 / s.real)
        phi_tilde = y_req / np.linalg.norm(y_req)

    a_op = nu * np.outer(phi_tilde, phi_tilde.conj()) + partial_transpose_b(
        np.outer(phi, phi.conj())
    )
    if np.linalg.norm(a_op @ psi.amp + alpha * psi.amp) > tol or alpha < -1e-9:
        return None
    witnesses = Witnesses(
        phi=PureState.normalized(phi),
        phi_tilde=PureState.normalized(phi_tilde),
        alpha=alpha,
        nu=nu,
    )
    return witnesses, DensityMatrix(mat)


def _pinch_fallback(rho: DensityMatrix, cfg: SolverConfig, path: Path,
                    require_c_phi: bool) -> Decomposition | None:
    """Locate the pure part by the pinched-optimum search, then rebuild
    witnesses; used when the boundary-witness multistart comes up empty."""
    for mu, psi in pinch_candidates(rho, cfg):
        lam = 1.0 - mu
        rebuilt = _witnesses_from_state(rho, lam, psi)
        if rebuilt is None:
            continue
        witnesses, rho_s = rebuilt
        if require_c_phi and concurrence_pure(witnesses.phi) <= C_TOL:
            continue
        return Decomposition(
            lam=lam, psi=psi, rho_s=rho_s, path=path, witnesses=witnesses
        )
    return None


def _decomposition_from_candidate(rho: DensityMatrix, cand, path: Path) -> Decomposition:
    psi_raw = rho.mat @ cand.phi_tilde.amp
    nr = np.linalg.norm(psi_raw)
    q = float(np.real(np.vdot(cand.phi_tilde.amp, psi_raw)))
    mu = min(nr * nr / q, 1.0)
    psi = PureState.normalized(psi_raw)
    lam = 1.0 - mu
    rho_s = DensityMatrix((rho.mat - mu * psi.projector()) / lam)
    return Decomposition(
        lam=lam,
        psi=psi,
        rho_s=rho_s,
        path=path,
        witnesses=Witnesses(
            phi=cand.phi, phi_tilde=cand.phi_tilde, alpha=cand.alpha, nu=cand.nu
        ),
    )


def _unique_decomposition(decs: list[Decomposition]) -> Decomposition:
    """Keep the best-residual decomposition; reject genuinely distinct ties."""
    kept = decs[0]
    for other in decs[1:]:
        same = (
            abs(other.lam - kept.lam) <= 1e-5
            and abs(abs(kept.psi.overlap(other.psi)) - 1.0) <= 1e-5
        )
        if not same:
            raise AmbiguousSolution(
                f"two admissible decompositions: lam={kept.lam!r} vs {other.lam!r}"
            )
    return kept


def bsa_rank3(rho: DensityMatrix, cfg: SolverConfig | None = None) -> Decomposition:
    """Nonlinear boundary-witness solve for a rank-4 input whose separable
    part has rank 3."""
    if concurrence_mixed(rho) <= C_TOL:
        raise NotEntangled("decomposition solve requires an entangled state")
    cfg = cfg or SolverConfig()
    cands = solve_multistart(rho, cfg, constraint_c_phi=False)
    admitted = [c for c in cands if c.admissible]
    if admitted:
        decs = [_decomposition_from_candidate(rho, c, Path.RANK3) for c in admitted]
        return _unique_decomposition(decs)
    dec = _pinch_fallback(rho, cfg, Path.RANK3, require_c_phi=False)
    if dec is not None:
        return dec
    best = min((c.residual_norm for c in cands), default=float("nan"))
    raise NoAdmissibleSolution(
        f"no admissible solution from {cfg.n_starts} starts "
        f"(best residual {best:.3e})"
    )


def _corollary_decomposition(rho: DensityMatrix, cand: CorollaryCandidate,
                             phi_tilde: PureState) -> Decomposition:
    rho_s = DensityMatrix(
        (rho.mat - (1.0 - cand.lam) * cand.psi.projector()) / cand.lam
    )
    return Decomposition(
        lam=cand.lam,
        psi=cand.psi,
        rho_s=rho_s,
        path=Path.DEGENERATE_COROLLARY,
        witnesses=Witnesses(
            phi=cand.phi, phi_tilde=phi_tilde, alpha=cand.alpha, nu=cand.nu
        ),
    )


def bsa_degenerate(rho: DensityMatrix, cfg: SolverConfig | None = None) -> Decomposition:
    """Decomposition of an entangled input with rank at most 3.

    A pure input returns lam = 0 directly.  Otherwise the boundary-witness
    system is attempted first, constrained to an entangled kernel witness;
    if no admissible solution exists, the pure part is re-solved with the
    input's zero mode(s) pinned (unique kernel vector for rank 3, a
    range-restricted pure part for rank 2).
    """
    if concurrence_mixed(rho) <= C_TOL:
        raise NotEntangled("decomposition solve requires an entangled state")
    cfg = cfg or SolverConfig()

    if rho.rank == 1:
        w, v = np.linalg.eigh(rho.mat)
        return Decomposition(
            lam=0.0,
            psi=PureState.normalized(v[:, 3]),
            rho_s=DensityMatrix.maximally_mixed(),
            path=Path.DEGENERATE_COROLLARY,
            witnesses=Witnesses(),
            rho_s_placeholder=True,
        )

    cands = solve_multistart(rho, cfg, constraint_c_phi=True)
    admitted = [c for c in cands if c.admissible]
    if admitted:
        decs = [
            _decomposition_from_candidate(rho, c, Path.DEGENERATE_COROLLARY)
            for c in admitted
        ]
        return _unique_decomposition(decs)

    if rho.rank == 3:
        kcands = solve_corollary_rank3(rho, cfg)
    else:
        kcands = solve_corollary_rank2(rho, cfg)
    kadmitted = [c for c in kcands if c.admissible]
    if kadmitted:
        w, v = np.linalg.eigh(rho.mat)
        phi_tilde = PureState.normalized(v[:, 0])
        decs = [_corollary_decomposition(rho, c, phi_tilde) for c in kadmitted]
        return _unique_decomposition(decs)

    dec = _pinch_fallback(rho, cfg, Path.DEGENERATE_COROLLARY, require_c_phi=True)
    if dec is not None:
        return dec
    best = min(
        (c.residual_norm for c in list(cands) + list(kcands)),
        default=float("nan"),
    )
    raise NoAdmissibleSolution(
        f"degenerate solve exhausted (rank {rho.rank}, best residual {best:.3e})"
    )


def compute(rho: DensityMatrix, cfg: SolverConfig | None = None) -> Decomposition:
    """Optimal decomposition of an arbitrary two-qubit density matrix.

    Separable inputs return lam = 1 with no pure part.  Entangled rank-4
    inputs try the closed-form route first and fall back to the nonlinear
    one; lower-rank inputs go through the kernel-aware solve.
    """
    separable, _ = is_separable(rho)
    if separable:
        return Decomposition(
            lam=1.0, psi=None, rho_s=rho, path=Path.SEPARABLE, witnesses=Witnesses()
        )
    if rho.rank == 4:
        dec = bsa_full_rank(rho)
        if dec is None:
            dec = bsa_rank3(rho, cfg)
        return dec
    return bsa_degenerate(rho, cfg)


def verify_theorem1(rho: DensityMatrix, dec: Decomposition, tol: float = 1e-8) -> VerificationReport:
    """Audit a proposed decomposition against the optimality conditions.

    Checks the reconstruction identity, positivity and PPT of the
    separable part, the kernel conditions on the witnesses, and the
    eigenvector condition of the witness operator, specialized to the
    claimed path.  Report-valued: never raises on a bad decomposition.
    """
    rho_mat = rho.mat
    lam = dec.lam
    rho_s_mat = dec.rho_s.mat

    if dec.psi is None:
        recon = lam * rho_s_mat
    elif dec.rho_s_placeholder:
        recon = dec.psi.projector()
    else:
        recon = (1.0 - lam) * dec.psi.projector() + lam * rho_s_mat
    rec_res = float(np.linalg.norm(rho_mat - recon))
    reconstruction_ok = rec_res <= RECONSTRUCTION_TOL

    rho_s_psd = min_eigenvalue(rho_s_mat) >= -PSD_TOL
    rho_s_ppt = min_eigenvalue(partial_transpose_b(rho_s_mat)) >= -PSD_TOL

    if dec.path is Path.SEPARABLE:
        verdict = (
            reconstruction_ok and rho_s_psd and rho_s_ppt
            and dec.psi is None and abs(lam - 1.0) <= tol
        )
        return VerificationReport(
            kernel_pt_residual=0.0, kernel_residual=0.0, eigen_residual=0.0,
            alpha_sign_ok=True, nu_sign_ok=True, c_phi_positive=True,
            reconstruction_ok=reconstruction_ok, rho_s_psd=rho_s_psd,
            rho_s_ppt=rho_s_ppt, psi_concurrence_ok=True, verdict=bool(verdict),
        )

    if dec.rho_s_placeholder:
        psi_ok = dec.psi is not None and concurrence_pure(dec.psi) > C_TOL
        verdict = reconstruction_ok and abs(lam) <= tol and psi_ok
        return VerificationReport(
            kernel_pt_residual=0.0, kernel_residual=0.0, eigen_residual=0.0,
            alpha_sign_ok=True, nu_sign_ok=True, c_phi_positive=True,
            reconstruction_ok=reconstruction_ok, rho_s_psd=True, rho_s_ppt=True,
            psi_concurrence_ok=bool(psi_ok), verdict=bool(verdict),
        )

    psi = dec.psi
    rho_s_tb = partial_transpose_b(rho_s_mat)

    if dec.witnesses.phi is not None:
        phi = dec.witnesses.phi.amp
    else:
        phi = hermitian_eig(rho_s_tb)[0].vector
    kernel_pt_residual = float(np.linalg.norm(rho_s_tb @ phi))

    c_phi = concurrence_pure(PureState.normalized(phi))
    alpha = dec.witnesses.alpha if dec.witnesses.alpha is not None else c_phi / 2.0

    if dec.path is Path.FULL_RANK:
        kernel_residual = 0.0
        nu = 0.0
        a_op = partial_transpose_b(np.outer(phi, phi.conj()))
        alpha_sign_ok = alpha > 0.0
        nu_sign_ok = True
        c_phi_positive = c_phi > C_TOL
        psi_concurrence_ok = abs(concurrence_pure(psi) - 1.0) <= 1e-8
    else:
        if dec.witnesses.phi_tilde is not None:
            phi_tilde = dec.witnesses.phi_tilde.amp
        else:
            phi_tilde = hermitian_eig(rho_s_mat)[0].vector
        nu = dec.witnesses.nu if dec.witnesses.nu is not None else 0.0
        kernel_residual = float(np.linalg.norm(rho_s_mat @ phi_tilde))
        a_op = nu * np.outer(phi_tilde, phi_tilde.conj()) + partial_transpose_b(
            np.outer(phi, phi.conj())
        )
        alpha_sign_ok = alpha >= -1e-9
        nu_sign_ok = nu >= -1e-9
        c_phi_positive = (c_phi > C_TOL) if dec.path is Path.DEGENERATE_COROLLARY else True
        psi_concurrence_ok = concurrence_pure(psi) > C_TOL

    eigen_residual = float(np.linalg.norm(a_op @ psi.amp + alpha * psi.amp))

    verdict = (
        reconstruction_ok and rho_s_psd and rho_s_ppt
        and kernel_pt_residual <= tol and kernel_residual <= tol
        and eigen_residual <= tol
        and alpha_sign_ok and nu_sign_ok and c_phi_positive and psi_concurrence_ok
    )
    return VerificationReport(
        kernel_pt_residual=kernel_pt_residual,
        kernel_residual=kernel_residual,
        eigen_residual=eigen_residual,
        alpha_sign_ok=bool(alpha_sign_ok),
        nu_sign_ok=bool(nu_sign_ok),
        c_phi_positive=bool(c_phi_positive),
        reconstruction_ok=bool(reconstruction_ok),
        rho_s_psd=bool(rho_s_psd),
        rho_s_ppt=bool(rho_s_ppt),
        psi_concurrence_ok=bool(psi_concurrence_ok),
        verdict=bool(verdict),
    )


def entanglement_measure(dec: Decomposition) -> float:
    """Pure-part weight times the pure-part concurrence (0 when separable)."""
    if dec.path is Path.SEPARABLE or dec.psi is None:
        return 0.0
    return float((1.0 - dec.lam) * concurrence_pure(dec.psi))
