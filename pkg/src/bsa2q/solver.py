"""Numerical machinery for the nonlinear decomposition paths.

Three pieces live here:

* residual formulations of the stationarity systems solved when the
  closed-form route is unavailable (boundary-witness equations for a
  rank-3 separable part, and their kernel-pinned variants for inputs of
  rank 3 or 2),
* a damped least-squares (Levenberg-Marquardt) minimizer with a
  deterministic, seeded multi-start driver, and
* an independent maximization oracle in the style of the original
  Lewenstein-Sanpera construction: bisection on the pure-part weight
  against a PSD-and-PPT feasibility predicate, wrapped in a seeded search
  over candidate pure states.  The oracle never touches the companion
  matrix Y or the stationarity systems; it exists to cross-check them.

Unit vectors are parametrized by an affine chart that pins one component
to be real and positive, eliminating normalization and global phase
explicitly (6 real parameters for a 4-vector, 2 for a 2-vector).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .mat4 import dagger, general_eig, phase_fix
from .qstate import (
    DensityMatrix,
    NotEntangled,
    PureState,
    concurrence_pure,
    is_separable,
    partial_transpose_b,
    random_max_entangled,
    random_pure,
)
from .spectra import build_Y
from .tolerances import C_TOL, PSD_TOL

__all__ = [
    "Admissibility",
    "SolverConfig",
    "CandidateSolution",
    "CorollaryCandidate",
    "residual_rank3",
    "solve_multistart",
    "solve_corollary_rank3",
    "solve_corollary_rank2",
    "pinch_candidates",
    "ls_oracle",
]


@dataclass(frozen=True)
class Admissibility:
    """Sign and positivity slacks applied when filtering solutions."""

    alpha_min: float = -1e-9
    nu_min: float = -1e-9
    psd_slack: float = PSD_TOL


@dataclass(frozen=True)
class SolverConfig:
    n_starts: int = 64
    seed: int = 0
    max_iters: int = 500
    residual_tol: float = 1e-11
    damping_init: float = 1e-3
    admissibility: Admissibility = field(default_factory=Admissibility)


@dataclass(frozen=True)
class CandidateSolution:
    """One multi-start outcome for the boundary-witness system."""

    phi_tilde: PureState
    phi: PureState
    alpha: float
    nu: float
    residual_norm: float
    admissible: bool


@dataclass(frozen=True)
class CorollaryCandidate:
    """One multi-start outcome for the kernel-pinned (degenerate) system."""

    psi: PureState
    phi: PureState
    alpha: float
    nu: float
    lam: float
    residual_norm: float
    admissible: bool


# ----------------------------------------------------------------------
# chart parametrization of phase-fixed unit vectors
# ----------------------------------------------------------------------

def _to_chart(v: np.ndarray) -> tuple[np.ndarray, int]:
    """Map a unit vector to 2*(n-1) real parameters, pinning its largest
    component to be real positive."""
    k = int(np.argmax(np.abs(v)))
    w = np.delete(v, k) / v[k]
    x = np.empty(2 * w.size)
    x[0::2] = w.real
    x[1::2] = w.imag
    return x, k


def _from_chart(x: np.ndarray, k: int, n: int = 4) -> np.ndarray:
    w = x[0::2] + 1j * x[1::2]
    v = np.insert(w, k, 1.0)
    return v / np.linalg.norm(v)


# ----------------------------------------------------------------------
# residual systems
# ----------------------------------------------------------------------

def _stack_complex(rows) -> np.ndarray:
    """Interleave the real and imaginary parts of complex residual rows."""
    return np.concatenate(
        [np.concatenate([np.atleast_1d(r).real, np.atleast_1d(r).imag]) for r in rows]
    )


def _rank3_residual(rho_mat, rho_tb, phi_tilde, phi, alpha, nu, extras=()) -> np.ndarray:
    """Stacked real residual of the two stationarity equations.

    First block: the partial transpose of rho|pt><pt|rho must annihilate
    phi up to the factor <pt|rho|pt> times rho^{T_B} phi (the separable
    part's partial transpose kills phi).  Second block: rho|pt> must be an
    eigenvector, with eigenvalue -alpha, of the witness operator
    nu |pt><pt| + [|phi><phi|]^{T_B}.  `extras` appends orthogonality rows
    (vector, which) with which in {"phi_tilde", "phi"}.
    """
    psi_raw = rho_mat @ phi_tilde
    q = float(np.real(np.vdot(phi_tilde, psi_raw)))
    e1 = partial_transpose_b(np.outer(psi_raw, psi_raw.conj())) @ phi - q * (rho_tb @ phi)
    a_op = partial_transpose_b(np.outer(phi, phi.conj()))
    e2 = nu * q * phi_tilde + a_op @ psi_raw + alpha * psi_raw
    rows = [e1, e2]
    for vec, which in extras:
        target = phi_tilde if which == "phi_tilde" else phi
        rows.append(np.vdot(vec, target))
    return _stack_complex(rows)


def residual_rank3(phi_tilde, phi, alpha: float, nu: float, rho: DensityMatrix) -> np.ndarray:
    """Public 16-vector residual of the boundary-witness system."""
    pt = phi_tilde.amp if isinstance(phi_tilde, PureState) else np.asarray(phi_tilde, complex)
    p = phi.amp if isinstance(phi, PureState) else np.asarray(phi, complex)
    rho_mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)
    return _rank3_residual(rho_mat, partial_transpose_b(rho_mat), pt, p, alpha, nu)


def _corollary_residual(rho_tb, kernel_orth, psi, phi, alpha, lam, extras=()) -> np.ndarray:
    """Stacked residual of the kernel-pinned system (nu fixed at 0).

    With the zero-mode of the input pinned, the witness operator's
    projector term acts on nothing (psi is orthogonal to the kernel), so
    the eigenvector condition involves only the partial transpose of
    |phi><phi|; the remaining rows force phi into the kernel of the
    separable part's partial transpose and psi out of the input's kernel
    complement.
    """
    proj_tb = partial_transpose_b(np.outer(psi, psi.conj()))
    e1 = rho_tb @ phi - (1.0 - lam) * (proj_tb @ phi)
    a_op = partial_transpose_b(np.outer(phi, phi.conj()))
    e2 = a_op @ psi + alpha * psi
    rows = [e1, e2]
    for kv in kernel_orth:
        rows.append(np.vdot(kv, psi))
    for vec, which in extras:
        target = psi if which == "psi" else phi
        rows.append(np.vdot(vec, target))
    return _stack_complex(rows)


# ----------------------------------------------------------------------
# damped least squares
# ----------------------------------------------------------------------

def _fd_jacobian(fun, x, r0):
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        h = 1e-7 * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        jac[:, j] = (fun(xp) - r0) / h
    return jac


def _levenberg_marquardt(fun, x0, max_iters, residual_tol, damping_init):
    """Classic Marquardt loop with multiplicative damping control.

    Exits on the residual target, a vanishing gradient, a tiny step, or
    three consecutive stagnant iterations (local minimum with nonzero
    residual: not worth polishing further).
    """
    x = np.asarray(x0, dtype=float).copy()
    r = fun(x)
    cost = float(r @ r)
    damping = damping_init
    stagnant = 0
    for _ in range(max_iters):
        if np.sqrt(cost) <= residual_tol:
            break
        jac = _fd_jacobian(fun, x, r)
        grad = jac.T @ r
        if np.max(np.abs(grad)) < 1e-16:
            break
        jtj = jac.T @ jac
        diag = np.clip(np.diag(jtj), 1e-12, None)
        moved = False
        for _ in range(30):
            try:
                step = np.linalg.solve(jtj + damping * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            x_new = x + step
            r_new = fun(x_new)
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                stagnant = stagnant + 1 if cost_new > cost * (1.0 - 1e-6) else 0
                x, r, cost = x_new, r_new, cost_new
                damping = max(damping / 3.0, 1e-14)
                moved = True
                break
            damping *= 4.0
        if not moved or stagnant >= 3:
            break
        if np.linalg.norm(step) < 1e-15 * (1.0 + np.linalg.norm(x)):
            break
    return x, float(np.sqrt(cost))


# ----------------------------------------------------------------------
# multi-start driver for the boundary-witness system
# ----------------------------------------------------------------------

def _negative_partner(phi: np.ndarray) -> np.ndarray:
    """Eigenvector at the lowest eigenvalue of the partial transpose of
    |phi><phi| (maximally entangled whenever phi is entangled)."""
    op = partial_transpose_b(np.outer(phi, phi.conj()))
    _, vecs = np.linalg.eigh((op + dagger(op)) / 2.0)
    return vecs[:, 0]


def _kernel_product_vectors(kernel: list[np.ndarray]) -> list[np.ndarray]:
    """Product vectors inside a 1- or 2-dimensional kernel (normalized)."""
    def _is_product(v):
        a = v.reshape(2, 2)
        return abs(2.0 * np.linalg.det(a)) <= 1e-10

    found = []
    if len(kernel) == 1:
        if _is_product(kernel[0]):
            found.append(kernel[0])
        return found
    if len(kernel) == 2:
        a1 = kernel[0].reshape(2, 2)
        a2 = kernel[1].reshape(2, 2)
        qa = np.linalg.det(a2)
        qb = (a1[0, 0] * a2[1, 1] + a2[0, 0] * a1[1, 1]
              - a1[0, 1] * a2[1, 0] - a2[0, 1] * a1[1, 0])
        qc = np.linalg.det(a1)
        roots = np.roots([qa, qb, qc]) if abs(qa) > 1e-14 else (
            np.roots([qb, qc]) if abs(qb) > 1e-14 else []
        )
        for t in roots:
            v = kernel[0] + t * kernel[1]
            nv = np.linalg.norm(v)
            if nv > 1e-10:
                v = v / nv
                if _is_product(v):
                    found.append(v)
        if abs(qa) <= 1e-14 and _is_product(kernel[1]):
            found.append(kernel[1])
    return found


def _product_factors(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Local factors (e, f) of a normalized product vector."""
    u, s, vh = np.linalg.svd(v.reshape(2, 2))
    return u[:, 0], vh[0, :].conj() * s[0]


def _dedup_key_distance(a, b) -> float:
    """Phase-invariant chordal distance between unit vectors."""
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * abs(np.vdot(a, b)))))


def _rho_s_checks(rho_mat, mu, psi, slack):
    lam = 1.0 - mu
    if lam < 1e-12:
        return None
    rho_s = (rho_mat - mu * np.outer(psi, psi.conj())) / lam
    if np.linalg.eigvalsh((rho_s + dagger(rho_s)) / 2.0)[0] < -slack:
        return None
    pt = partial_transpose_b(rho_s)
    if np.linalg.eigvalsh((pt + dagger(pt)) / 2.0)[0] < -slack:
        return None
    return rho_s


def _rank3_starts(rho: DensityMatrix, rng: np.random.Generator, n_starts: int):
    """Deterministic start list: informed guesses first, then random.

    Returns the starts plus the count of informed ones, which the driver
    runs as a batch of their own before paying for random starts.
    """
    rho_mat = rho.mat
    rho_tb = partial_transpose_b(rho_mat)
    starts = []

    def _informed(phi0, nu0=0.0):
        phi0 = phase_fix(phi0)
        psi0 = _negative_partner(phi0)
        try:
            if rho.rank == 4:
                pt0 = np.linalg.solve(rho_mat, psi0)
            else:
                pt0 = np.linalg.lstsq(rho_mat, psi0, rcond=None)[0]
        except np.linalg.LinAlgError:
            return
        npt = np.linalg.norm(pt0)
        if not np.isfinite(npt) or npt < 1e-12:
            return
        alpha0 = concurrence_pure(PureState.normalized(phi0)) / 2.0
        starts.append((phase_fix(pt0 / npt), phi0, alpha0, nu0))

    pairs, _ = general_eig(build_Y(rho_mat))
    _informed(pairs[0].vector)
    w, v = np.linalg.eigh(rho_tb)
    if w[0] < 0:
        _informed(v[:, 0])
    _informed(pairs[0].vector, nu0=0.5)
    n_informed = len(starts)
    while len(starts) < n_starts:
        pt = random_pure(rng).amp
        ph = random_pure(rng).amp
        starts.append((pt, ph, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)))
    return starts[:n_starts], max(n_informed, 1)


_BATCH = 8


def _batch_edges(n_total: int, first: int):
    edges = [0, min(first, n_total)]
    while edges[-1] < n_total:
        edges.append(min(edges[-1] + _BATCH, n_total))
    return list(zip(edges[:-1], edges[1:]))


def solve_multistart(
    rho: DensityMatrix,
    cfg: SolverConfig | None = None,
    constraint_c_phi: bool = False,
) -> list[CandidateSolution]:
    """Solve the boundary-witness system from seeded multi-starts.

    Starts run in a fixed order; after each batch the driver stops early
    once an admissible solution exists, which keeps the outcome
    deterministic for a fixed seed.  Solutions closer than 1e-6 in
    parameter space (modulo phase) are deduplicated; the list is sorted by
    residual, ties broken by start index.  An empty or fully inadmissible
    list is a valid outcome for the caller to interpret.
    """
    cfg = cfg or SolverConfig()
    adm = cfg.admissibility
    rho_mat = rho.mat
    rho_tb = partial_transpose_b(rho_mat)

    extras = []
    if rho.rank < 4:
        kernel = [phase_fix(v) for v in _kernel_basis(rho)]
        for kv in _kernel_product_vectors(kernel):
            e, f = _product_factors(kv)
            extras.append((np.kron(e, f), "phi_tilde"))
            extras.append((np.kron(e, f.conj()), "phi"))

    starts, n_informed = _rank3_starts(rho, np.random.default_rng(cfg.seed), cfg.n_starts)
    results: list[tuple[float, int, CandidateSolution]] = []

    for batch_lo, batch_hi in _batch_edges(len(starts), n_informed):
        for idx in range(batch_lo, batch_hi):
            pt0, ph0, a0, n0 = starts[idx]
            x_t, k_t = _to_chart(pt0)
            x_p, k_p = _to_chart(ph0)
            x0 = np.concatenate([x_t, x_p, [a0, n0]])

            def fun(x, k_t=k_t, k_p=k_p):
                return _rank3_residual(
                    rho_mat, rho_tb,
                    _from_chart(x[0:6], k_t), _from_chart(x[6:12], k_p),
                    x[12], x[13], extras,
                )

            x_fin, res = _levenberg_marquardt(
                fun, x0, cfg.max_iters, cfg.residual_tol, cfg.damping_init
            )
            phi_tilde = _from_chart(x_fin[0:6], k_t)
            phi = _from_chart(x_fin[6:12], k_p)
            alpha, nu = float(x_fin[12]), float(x_fin[13])

            admissible = res <= cfg.residual_tol
            if admissible:
                admissible = alpha >= adm.alpha_min and nu >= adm.nu_min
            if admissible and constraint_c_phi:
                admissible = concurrence_pure(PureState.normalized(phi)) > C_TOL
            if admissible:
                psi_raw = rho_mat @ phi_tilde
                nr = np.linalg.norm(psi_raw)
                q = float(np.real(np.vdot(phi_tilde, psi_raw)))
                if nr < 1e-12 or q < 1e-14:
                    admissible = False
                else:
                    mu = nr * nr / q
                    psi = psi_raw / nr
                    admissible = (
                        C_TOL < mu <= 1.0 + 1e-9
                        and concurrence_pure(PureState.normalized(psi)) > C_TOL
                        and _rho_s_checks(rho_mat, min(mu, 1.0), psi, adm.psd_slack) is not None
                    )

            cand = CandidateSolution(
                phi_tilde=PureState.normalized(phase_fix(phi_tilde)),
                phi=PureState.normalized(phase_fix(phi)),
                alpha=alpha,
                nu=nu,
                residual_norm=res,
                admissible=bool(admissible),
            )
            results.append((res, idx, cand))
        if any(c.admissible for _, _, c in results):
            break

    results.sort(key=lambda t: (t[0], t[1]))
    deduped: list[CandidateSolution] = []
    for _, _, cand in results:
        duplicate = False
        for kept in deduped:
            if (
                _dedup_key_distance(cand.phi_tilde.amp, kept.phi_tilde.amp) < 1e-6
                and _dedup_key_distance(cand.phi.amp, kept.phi.amp) < 1e-6
                and abs(cand.alpha - kept.alpha) < 1e-6
                and abs(cand.nu - kept.nu) < 1e-6
            ):
                duplicate = True
                break
        if not duplicate:
            deduped.append(cand)
    return deduped


def _kernel_basis(rho: DensityMatrix) -> list[np.ndarray]:
    w, v = np.linalg.eigh(rho.mat)
    return [v[:, i] for i in range(4 - rho.rank)]


def _range_basis(rho: DensityMatrix) -> list[np.ndarray]:
    w, v = np.linalg.eigh(rho.mat)
    return [v[:, i] for i in range(4 - rho.rank, 4)]


# ----------------------------------------------------------------------
# kernel-pinned solves for degenerate inputs
# ----------------------------------------------------------------------

def _finish_corollary(rho_mat, psi, phi, alpha, lam, res, cfg) -> CorollaryCandidate:
    adm = cfg.admissibility
    admissible = res <= cfg.residual_tol and alpha >= adm.alpha_min
    lam_c = float(np.clip(lam, 0.0, 1.0))
    if admissible:
        admissible = -1e-9 <= lam <= 1.0 + 1e-9
    if admissible:
        admissible = concurrence_pure(PureState.normalized(phi)) > C_TOL
    if admissible:
        admissible = concurrence_pure(PureState.normalized(psi)) > C_TOL
    if admissible:
        mu = 1.0 - lam_c
        admissible = mu > C_TOL and _rho_s_checks(rho_mat, mu, psi, adm.psd_slack) is not None
    return CorollaryCandidate(
        psi=PureState.normalized(phase_fix(psi)),
        phi=PureState.normalized(phase_fix(phi)),
        alpha=float(alpha),
        nu=0.0,
        lam=lam_c,
        residual_norm=res,
        admissible=bool(admissible),
    )


def _corollary_starts(rho, rng, n_starts, project_psi):
    from .qstate import concurrence_mixed  # local import to avoid top clutter

    starts = []
    pairs, _ = general_eig(build_Y(rho.mat))
    phi0 = phase_fix(pairs[0].vector)
    psi0 = project_psi(_negative_partner(phi0))
    if psi0 is not None:
        lam0 = float(np.clip(1.0 - concurrence_mixed(rho), 0.05, 0.95))
        c0 = concurrence_pure(PureState.normalized(phi0))
        starts.append((psi0, phi0, c0 / 2.0, lam0))
    while len(starts) < n_starts:
        psi = project_psi(random_pure(rng).amp)
        if psi is None:
            continue
        starts.append((psi, random_pure(rng).amp, rng.uniform(0.0, 1.0), rng.uniform(0.05, 0.95)))
    return starts[:n_starts]


def solve_corollary_rank3(rho: DensityMatrix, cfg: SolverConfig | None = None) -> list[CorollaryCandidate]:
    """Kernel-pinned solve for a rank-3 input.

    The zero mode of rho fixes the separable part's kernel vector, the
    pure part must be orthogonal to it, and the projector weight in the
    witness operator drops out (reported as 0).
    """
    cfg = cfg or SolverConfig()
    rho_mat = rho.mat
    rho_tb = partial_transpose_b(rho_mat)
    kernel = phase_fix(_kernel_basis(rho)[0])

    extras = []
    for kv in _kernel_product_vectors([kernel]):
        e, f = _product_factors(kv)
        extras.append((np.kron(e, f.conj()), "phi"))

    def project_psi(v):
        w = v - kernel * np.vdot(kernel, v)
        nw = np.linalg.norm(w)
        return None if nw < 1e-8 else w / nw

    rng = np.random.default_rng(cfg.seed + 1)
    starts = _corollary_starts(rho, rng, cfg.n_starts, project_psi)
    results = []
    for batch_lo, batch_hi in _batch_edges(len(starts), 1):
        for idx in range(batch_lo, batch_hi):
            psi0, phi0, a0, l0 = starts[idx]
            x_s, k_s = _to_chart(psi0)
            x_p, k_p = _to_chart(phi0)
            x0 = np.concatenate([x_s, x_p, [a0, l0]])

            def fun(x, k_s=k_s, k_p=k_p):
                return _corollary_residual(
                    rho_tb, [kernel],
                    _from_chart(x[0:6], k_s), _from_chart(x[6:12], k_p),
                    x[12], x[13], extras,
                )

            x_fin, res = _levenberg_marquardt(
                fun, x0, cfg.max_iters, cfg.residual_tol, cfg.damping_init
            )
            cand = _finish_corollary(
                rho_mat,
                _from_chart(x_fin[0:6], k_s), _from_chart(x_fin[6:12], k_p),
                x_fin[12], x_fin[13], res, cfg,
            )
            results.append((res, idx, cand))
        if any(c.admissible for _, _, c in results):
            break
    results.sort(key=lambda t: (t[0], t[1]))
    return [c for _, _, c in results]


def solve_corollary_rank2(rho: DensityMatrix, cfg: SolverConfig | None = None) -> list[CorollaryCandidate]:
    """Kernel-pinned solve for a rank-2 input.

    The pure part is parametrized inside the 2-dimensional range of rho,
    which keeps it orthogonal to both kernel vectors by construction.
    """
    cfg = cfg or SolverConfig()
    rho_mat = rho.mat
    rho_tb = partial_transpose_b(rho_mat)
    kernel = [phase_fix(v) for v in _kernel_basis(rho)]
    range_b = np.stack(_range_basis(rho), axis=1)  # 4x2

    extras = []
    for kv in _kernel_product_vectors(kernel):
        e, f = _product_factors(kv)
        extras.append((np.kron(e, f.conj()), "phi"))

    def psi_of(x2, pin):
        w = x2[0] + 1j * x2[1]
        coeff = np.insert(np.array([w]), pin, 1.0)
        coeff /= np.linalg.norm(coeff)
        return range_b @ coeff

    rng = np.random.default_rng(cfg.seed + 2)

    def project_psi(v):
        coeff = dagger(range_b) @ v
        nc = np.linalg.norm(coeff)
        return None if nc < 1e-8 else range_b @ (coeff / nc)

    starts = _corollary_starts(rho, rng, cfg.n_starts, project_psi)
    results = []
    for batch_lo, batch_hi in _batch_edges(len(starts), 1):
        for idx in range(batch_lo, batch_hi):
            psi0, phi0, a0, l0 = starts[idx]
            coeff0 = dagger(range_b) @ psi0
            pin = int(np.argmax(np.abs(coeff0)))
            other = coeff0[1 - pin] / coeff0[pin]
            x_p, k_p = _to_chart(phi0)
            x0 = np.concatenate([[other.real, other.imag], x_p, [a0, l0]])

            def fun(x, pin=pin, k_p=k_p):
                return _corollary_residual(
                    rho_tb, [],
                    psi_of(x[0:2], pin), _from_chart(x[2:8], k_p),
                    x[8], x[9], extras,
                )

            x_fin, res = _levenberg_marquardt(
                fun, x0, cfg.max_iters, cfg.residual_tol, cfg.damping_init
            )
            cand = _finish_corollary(
                rho_mat,
                psi_of(x_fin[0:2], pin), _from_chart(x_fin[2:8], k_p),
                x_fin[8], x_fin[9], res, cfg,
            )
            results.append((res, idx, cand))
        if any(c.admissible for _, _, c in results):
            break
    results.sort(key=lambda t: (t[0], t[1]))
    return [c for _, _, c in results]


# ----------------------------------------------------------------------
# independent maximization oracle
# ----------------------------------------------------------------------

def _pt_b_batch(m: np.ndarray) -> np.ndarray:
    """Partial transpose over the second factor for a (..., 4, 4) stack."""
    shape = m.shape
    return (
        m.reshape(shape[:-2] + (2, 2, 2, 2))
        .transpose(tuple(range(m.ndim - 2)) + (m.ndim - 2, m.ndim + 1, m.ndim, m.ndim - 1))
        .reshape(shape)
    )


def _psi_score(rho_mat, rho_pinv, rho_tb, amp, slack):
    """Merit of a candidate pure part for the maximization oracle.

    The minimum eigenvalue of an affine Hermitian pencil is concave in the
    weight, so both constraint sets are intervals.  The PSD window is
    [0, 1/<psi|rho^+|psi>]; the PPT interval's endpoints are generalized
    eigenvalues of the pencil (rho^{T_B}, [|psi><psi|]^{T_B}), located
    exactly instead of by bisection.  Returns ("feasible", mu_left, None)
    with the smallest weight whose remainder is PSD and PPT, or
    ("infeasible", peak, mu_peak) where peak < 0 is the best margin the
    PPT constraint attains inside the PSD window and mu_peak its location;
    both vary continuously with the candidate, which gives the outer
    search a descent signal before reaching feasibility.
    """
    proj = np.outer(amp, amp.conj())
    proj_tb = partial_transpose_b(proj)

    mu_p = 1.0 / float(np.real(np.vdot(amp, rho_pinv @ amp)))
    mu_p = min(mu_p, 1.0)
    if mu_p <= 0.0:
        return "infeasible", float(np.linalg.eigvalsh(rho_tb)[0]), 0.0

    def h2(mu):
        return float(np.linalg.eigvalsh(rho_tb - mu * proj_tb)[0])

    # boundary candidates: values where rho_tb - mu * proj_tb is singular
    c_amp = 2.0 * abs(amp[0] * amp[3] - amp[1] * amp[2])
    points = [0.0, mu_p]
    if c_amp > 1e-12:
        try:
            gev = np.linalg.eigvals(np.linalg.solve(proj_tb, rho_tb))
            points += [
                float(g.real) for g in gev
                if abs(g.imag) <= 1e-9 and 0.0 < g.real < mu_p
            ]
        except np.linalg.LinAlgError:
            pass
    points = sorted(set(points))

    # the feasible set of the concave margin is one interval whose
    # endpoints sit on the candidate list (or at a touching point); the
    # left endpoint of the first feasible segment is the answer
    feas_mid = [
        h2(0.5 * (a + b)) >= -slack for a, b in zip(points[:-1], points[1:])
    ]
    for i, ok in enumerate(feas_mid):
        if ok:
            return "feasible", points[i], None
    for p in points:
        if h2(p) >= -slack:  # single touching point
            return "feasible", p, None

    res = minimize_scalar(
        lambda m: -h2(m), bounds=(0.0, mu_p), method="bounded",
        options={"xatol": 1e-10},
    )
    peak, mu_peak = -float(res.fun), float(res.x)
    for mu_b in (0.0, mu_p):
        if h2(mu_b) > peak:
            peak, mu_peak = h2(mu_b), mu_b
    return "infeasible", peak, mu_peak


def _oracle_scan(rho_mat, rho_tb, amps, grid, slack):
    """Batched coarse scan over a weight grid.

    Returns per candidate the leftmost feasible grid weight (inf when
    none), the best grid value of the joint constraint margin, and the
    grid weight where that best value occurs.
    """
    n = amps.shape[0]
    first_mu = np.full(n, np.inf)
    peaks = np.full(n, -np.inf)
    peak_mu = np.zeros(n)
    for lo in range(0, n, 256):
        chunk = amps[lo: lo + 256]
        projs = chunk[:, :, None] * chunk.conj()[:, None, :]
        projs_tb = _pt_b_batch(projs)
        a1 = rho_mat[None, None] - grid[None, :, None, None] * projs[:, None]
        a2 = rho_tb[None, None] - grid[None, :, None, None] * projs_tb[:, None]
        m1 = np.linalg.eigvalsh(a1)[..., 0]
        m2 = np.linalg.eigvalsh(a2)[..., 0]
        joint = np.minimum(m1, m2)
        feas = joint >= -slack
        has = feas.any(axis=1)
        first = np.argmax(feas, axis=1)
        first_mu[lo: lo + 256][has] = grid[first[has]]
        peaks[lo: lo + 256] = joint.max(axis=1)
        peak_mu[lo: lo + 256] = grid[np.argmax(joint, axis=1)]
    return first_mu, peaks, peak_mu


class _WeightSearch:
    """Shared machinery for searching over candidate pure parts.

    Candidates live in the range of the input state (where the optimal
    pure part must lie) and are parametrized by the pinned affine chart.
    Provides the exact left-weight merit, a smooth quadratic-penalty merit
    for pinched optima (singular separable part), their analytic
    gradients through eigenvalue perturbation, and a Newton repair back
    onto the feasibility sliver.  Every feasible evaluation updates the
    incumbent (best weight seen so far).
    """

    def __init__(self, rho: DensityMatrix, slack: float):
        self.rho_mat = rho.mat
        self.rho_tb = partial_transpose_b(self.rho_mat)
        self.rho_pinv = np.linalg.pinv(self.rho_mat, rcond=1e-12, hermitian=True)
        self.slack = slack
        self.rank = rho.rank
        _, evecs = np.linalg.eigh(self.rho_mat)
        self.basis = evecs[:, 4 - self.rank:]
        self.best_mu = np.inf
        self.best_amp = None

    def amp_of_x(self, x, pin):
        c = np.insert(x[0::2] + 1j * x[1::2], pin, 1.0)
        return self.basis @ (c / np.linalg.norm(c))

    def coords_of_amp(self, amp):
        return dagger(self.basis) @ amp

    def score_amp(self, amp):
        return _psi_score(self.rho_mat, self.rho_pinv, self.rho_tb, amp, self.slack)

    def _track(self, mu, amp):
        if mu < self.best_mu:
            self.best_mu, self.best_amp = mu, amp

    def _chart_grad(self, u, nc, gc, pin):
        """Map a complex cogradient (df = 2 Re<d psi|v>, gc = basis^dag v)
        through the normalized affine chart to real parameters."""
        t = float(np.real(np.vdot(u, gc)))
        keep = [i for i in range(self.rank) if i != pin]
        grad = np.empty(2 * (self.rank - 1))
        grad[0::2] = 2.0 * (gc.real - u.real * t)[keep] / nc
        grad[1::2] = 2.0 * (gc.imag - u.imag * t)[keep] / nc
        return grad

    def objective(self, x, pin):
        """Continuous merit: the left feasible weight, extended past the
        feasibility boundary by the peak location plus a violation term."""
        amp = self.amp_of_x(x, pin)
        kind, val, mu_peak = self.score_amp(amp)
        if kind == "feasible":
            self._track(val, amp)
            return val
        return mu_peak + 10.0 * (-val)

    def objective_grad(self, x, pin):
        """Value and gradient of the left feasible weight.

        First-order perturbation of the boundary generalized eigenvalue:
        with w the null vector of rho_tb - mu*[|psi><psi|]^{T_B} and W the
        partial transpose of |w><w|, the weight moves as
        -2 mu Re<d psi|W|psi> / <psi|W|psi>.  Off the feasible branch the
        value is penalized with a zero gradient, making line searches
        retreat.
        """
        c = np.insert(x[0::2] + 1j * x[1::2], pin, 1.0)
        nc = np.linalg.norm(c)
        u = c / nc
        amp = self.basis @ u
        kind, val, mu_peak = self.score_amp(amp)
        if kind != "feasible":
            return mu_peak + 10.0 * (-val), np.zeros(x.size)
        mu = val
        self._track(mu, amp)
        m = self.rho_tb - mu * partial_transpose_b(np.outer(amp, amp.conj()))
        wv, vv = np.linalg.eigh(m)
        w = vv[:, int(np.argmin(np.abs(wv)))]
        w_op = partial_transpose_b(np.outer(w, w.conj()))
        denom = float(np.real(np.vdot(amp, w_op @ amp)))
        if abs(denom) < 1e-12:  # interval shrank to a point; gradient blows up
            return mu, np.zeros(x.size)
        gc = dagger(self.basis) @ (w_op @ amp)
        return mu, (-mu / denom) * self._chart_grad(u, nc, gc, pin)

    def _cap_margin_full(self, x, pin):
        c = np.insert(x[0::2] + 1j * x[1::2], pin, 1.0)
        nc = np.linalg.norm(c)
        u = c / nc
        amp = self.basis @ u
        mu_p = min(1.0 / float(np.real(np.vdot(amp, self.rho_pinv @ amp))), 1.0)
        proj_tb = partial_transpose_b(np.outer(amp, amp.conj()))
        wv, vv = np.linalg.eigh(self.rho_tb - mu_p * proj_tb)
        return u, nc, amp, mu_p, proj_tb, float(wv[0]), vv[:, 0]

    def _margin_cograds(self, u, amp, mu_p, proj_tb, w):
        w_op = partial_transpose_b(np.outer(w, w.conj()))
        bw = float(np.real(np.vdot(w, proj_tb @ w)))
        v_cap = -(mu_p * mu_p) * (self.rho_pinv @ amp)
        v_margin = -bw * v_cap - mu_p * (w_op @ amp)
        return v_cap, v_margin

    def objective_pinch(self, x, pin, w_pen):
        """Smoothly penalized merit for optima where the feasible interval
        pinches shut (singular separable part): the pure-part weight then
        equals the PSD cap 1/<psi|rho^+|psi>, and the PPT margin at the
        cap must vanish.  Both pieces and their first-order perturbations
        are exact, so a quasi-Newton descent converges tightly.
        """
        u, nc, amp, mu_p, proj_tb, margin, w = self._cap_margin_full(x, pin)
        viol = max(0.0, -margin)
        value = mu_p + w_pen * viol * viol
        v_cap, v_margin = self._margin_cograds(u, amp, mu_p, proj_tb, w)
        g_cap = self._chart_grad(u, nc, dagger(self.basis) @ v_cap, pin)
        if viol == 0.0:
            return value, g_cap
        g_margin = self._chart_grad(u, nc, dagger(self.basis) @ v_margin, pin)
        return value, g_cap - 2.0 * w_pen * viol * g_margin

    def repair_and_track(self, x, pin):
        """Newton steps on the cap margin to land back on the feasible
        sliver (the margin touches zero quadratically there), then feed
        the incumbent through the exact scorer."""
        x = x.copy()
        for _ in range(12):
            u, nc, amp, mu_p, proj_tb, margin, w = self._cap_margin_full(x, pin)
            if margin >= -self.slack:
                break
            _, v_margin = self._margin_cograds(u, amp, mu_p, proj_tb, w)
            grad = self._chart_grad(u, nc, dagger(self.basis) @ v_margin, pin)
            gn2 = float(grad @ grad)
            if gn2 < 1e-18:
                return
            x = x - margin * grad / gn2
        amp = self.amp_of_x(x, pin)
        kind, val, _ = self.score_amp(amp)
        if kind == "feasible":
            self._track(val, amp)

    def refine(self, coords0, refine_iters):
        """Full refinement pipeline from one candidate: simplex descent on
        the continuous merit, gradient polish, then the pinched-optimum
        penalty schedule with sliver repair."""
        x0, pin = _to_chart(coords0)
        res = minimize(
            self.objective, x0, args=(pin,), method="Nelder-Mead",
            options={"maxiter": refine_iters, "xatol": 1e-7, "fatol": 1e-13},
        )
        minimize(
            self.objective_grad, res.x, args=(pin,), jac=True, method="L-BFGS-B",
            options={"maxiter": refine_iters, "ftol": 1e-18, "gtol": 1e-14},
        )
        x_b = np.asarray(res.x)
        for w_pen in (1e3, 1e5, 1e7, 1e9):
            res_b = minimize(
                self.objective_pinch, x_b, args=(pin, w_pen), jac=True,
                method="L-BFGS-B",
                options={"maxiter": refine_iters, "ftol": 1e-18, "gtol": 1e-14},
            )
            x_b = np.asarray(res_b.x)
        self.repair_and_track(x_b, pin)

    def pinch_only(self, coords0, refine_iters):
        """Penalty-schedule descent alone, for callers that know the
        optimum is pinched (rank-deficient separable part)."""
        x_b, pin = _to_chart(coords0)
        for w_pen in (1e3, 1e5, 1e7, 1e9):
            res_b = minimize(
                self.objective_pinch, x_b, args=(pin, w_pen), jac=True,
                method="L-BFGS-B",
                options={"maxiter": refine_iters, "ftol": 1e-18, "gtol": 1e-14},
            )
            x_b = np.asarray(res_b.x)
        self.repair_and_track(x_b, pin)


def _witness_partner_seed(search: _WeightSearch):
    """Entangled partner of the most negative partial-transpose
    eigenvector, mapped into range coordinates (None if degenerate)."""
    w_tb, v_tb = np.linalg.eigh(search.rho_tb)
    if w_tb[0] >= 0:
        return None
    partner = search.coords_of_amp(_negative_partner(v_tb[:, 0]))
    if np.linalg.norm(partner) < 1e-6:
        return None
    return partner / np.linalg.norm(partner)


def pinch_candidates(
    rho: DensityMatrix,
    cfg: SolverConfig | None = None,
    n_random: int = 12,
    refine_iters: int = 200,
) -> list[tuple[float, PureState]]:
    """Pure parts whose remainder is singular, PSD and PPT, by weight.

    For a decomposition whose separable part is rank deficient, the
    pure-part weight equals the PSD cap and the cap's PPT margin vanishes,
    which this solves directly by a smooth penalty descent from seeded
    starts.  Returns feasible (weight, pure part) pairs sorted by weight.
    Used as a fallback by the decomposition paths; not independent of
    them in spirit, but still free of the companion-matrix route.
    """
    cfg = cfg or SolverConfig()
    search = _WeightSearch(rho, cfg.admissibility.psd_slack)
    if search.rank < 2:
        return []
    rng = np.random.default_rng(cfg.seed + 3)
    seeds = []
    partner = _witness_partner_seed(search)
    if partner is not None:
        seeds.append(partner)
    while len(seeds) < n_random:
        c = rng.standard_normal(search.rank) + 1j * rng.standard_normal(search.rank)
        seeds.append(c / np.linalg.norm(c))
    found: list[tuple[float, PureState]] = []
    for coords0 in seeds:
        search.best_mu, search.best_amp = np.inf, None
        search.pinch_only(coords0, refine_iters)
        if search.best_amp is not None:
            psi = PureState.normalized(phase_fix(search.best_amp))
            if all(
                abs(psi.overlap(p)) < 1.0 - 1e-8 or abs(mu - search.best_mu) > 1e-8
                for mu, p in found
            ):
                found.append((float(search.best_mu), psi))
    found.sort(key=lambda t: t[0])
    return found


def ls_oracle(
    rho: DensityMatrix,
    cfg: SolverConfig | None = None,
    n_psi: int = 2000,
    refine_iters: int = 200,
    top_k: int = 4,
) -> tuple[float, PureState]:
    """Direct maximization of the separable weight, independent of the
    algebraic construction.

    For each candidate pure part the maximal separable weight comes from
    the interval where the remainder stays PSD and PPT (sufficient for two
    qubits after normalization), whose left endpoint is located exactly
    through the boundary generalized eigenvalues.  Candidates live in the
    range of the input (where the optimal pure part must lie); the outer
    search draws seeded random candidates, half of them maximally
    entangled, scans them on a weight grid, then refines the best few with
    simplex descent, gradient polish, and a pinched-optimum pass.
    Deterministic for a fixed seed.  Never touches the companion matrix Y
    or the boundary-witness equations; it exists to cross-check them.
    """
    cfg = cfg or SolverConfig()
    separable, _ = is_separable(rho)
    if separable:
        raise NotEntangled("oracle requires an entangled state")
    rng = np.random.default_rng(cfg.seed)
    search = _WeightSearch(rho, cfg.admissibility.psd_slack)
    rank = search.rank
    basis = search.basis

    if rank == 1:
        amp = phase_fix(basis[:, 0])
        kind, val, _ = search.score_amp(amp)
        if kind != "feasible":
            raise RuntimeError("oracle found no feasible pure part")
        return 1.0 - val, PureState.normalized(amp)

    coords = rng.standard_normal((n_psi, rank)) + 1j * rng.standard_normal((n_psi, rank))
    for i in range(0, n_psi, 2):  # half the draws: maximally entangled seeds
        me = random_max_entangled(rng).amp
        proj_coords = dagger(basis) @ me
        if np.linalg.norm(proj_coords) > 1e-6:
            coords[i] = proj_coords
    partner = _witness_partner_seed(search)
    if partner is not None:
        coords[0] = partner
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    amps = coords @ basis.T

    grid = np.linspace(0.0, 1.0, 41)
    first_mu, peaks, peak_mu = _oracle_scan(
        search.rho_mat, search.rho_tb, amps, grid, search.slack
    )

    # feasible candidates first (by leftmost weight), then near-feasible
    rank_key = np.where(np.isfinite(first_mu), first_mu, peak_mu - 10.0 * peaks)
    rank_key[0] = min(rank_key[0], np.min(rank_key))  # witness seed always refined
    order = np.argsort(rank_key, kind="stable")
    picks: list[int] = []
    for idx in order:
        if all(abs(np.vdot(amps[idx], amps[j])) < 0.95 for j in picks):
            picks.append(int(idx))
        if len(picks) >= top_k:
            break

    for idx in picks:
        search.refine(coords[idx], refine_iters)

    if search.best_amp is None:
        raise RuntimeError("oracle found no feasible pure part")
    # one more gradient polish from the overall incumbent
    x0, pin = _to_chart(search.coords_of_amp(search.best_amp))
    minimize(
        search.objective_grad, x0, args=(pin,), jac=True, method="L-BFGS-B",
        options={"maxiter": refine_iters, "ftol": 1e-18, "gtol": 1e-14},
    )
    return 1.0 - search.best_mu, PureState.normalized(phase_fix(search.best_amp))
