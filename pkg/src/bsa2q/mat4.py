"""Dense complex linear algebra for the fixed 2x2 and 4x4 matrices used here.

Everything operates on plain numpy arrays (row-major, complex dtype).  The
eigensolvers wrap LAPACK through numpy but add the contracts the rest of
the package relies on: Hermiticity gating, deterministic eigenvector
phases, residual audits, and a degeneracy flag for the non-Hermitian case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tolerances import DEGENERACY_TOL, EIG_TOL, HERMITICITY_TOL

__all__ = [
    "PAULI_Y",
    "SPIN_FLIP",
    "NotHermitian",
    "ConvergenceFailure",
    "EigenPair",
    "as_cmat",
    "dagger",
    "phase_fix",
    "hermitian_eig",
    "general_eig",
    "min_eigenvalue",
]


class NotHermitian(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class ConvergenceFailure(RuntimeError):
    """Eigensolver failed or did not reach the required residual."""


PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
# Two-qubit spin flip: real, symmetric, equal to its own conjugate, squares
# to the identity.
SPIN_FLIP = np.kron(PAULI_Y, PAULI_Y)

PAULI_Y.setflags(write=False)
SPIN_FLIP.setflags(write=False)


def as_cmat(m, dim: int | None = None) -> np.ndarray:
    """Validate `m` as a finite square complex matrix of dimension 2 or 4."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in (2, 4):
        raise ValueError(f"expected dimension 2 or 4, got {a.shape[0]}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {a.shape[0]}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-modulus component is real >= 0.

    Ties resolve to the first index of maximal modulus, which makes the
    result deterministic for a fixed input vector.
    """
    w = np.asarray(v, dtype=complex).copy()
    k = int(np.argmax(np.abs(w)))
    mag = abs(w[k])
    if mag > 0.0:
        w *= w[k].conjugate() / mag
        w[k] = mag
    return w


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its unit-norm, phase-fixed eigenvector."""

    value: complex
    vector: np.ndarray

    def __post_init__(self):
        self.vector.setflags(write=False)


def _herm_part(m: np.ndarray) -> np.ndarray:
    asym = np.max(np.abs(m - dagger(m)))
    if asym > HERMITICITY_TOL:
        raise NotHermitian(f"matrix deviates from Hermitian by {asym:.3e}")
    return (m + dagger(m)) / 2.0


def hermitian_eig(m) -> list[EigenPair]:
    """Eigendecomposition of a Hermitian matrix, ascending by eigenvalue.

    Eigenvectors are orthonormal and phase-fixed.  The reconstruction
    V diag(w) V^dag is audited against the input before returning.
    """
    a = as_cmat(m)
    h = _herm_part(a)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {exc}") from exc
    scale = max(np.linalg.norm(h), 1e-300)
    recon = (vecs * vals) @ dagger(vecs)
    if np.linalg.norm(recon - h) > 1e-10 * scale:
        raise ConvergenceFailure("eigendecomposition failed reconstruction audit")
    return [EigenPair(complex(vals[i]), phase_fix(vecs[:, i])) for i in range(len(vals))]


def _polish_pair(a: np.ndarray, lam: complex, v: np.ndarray):
    """One shifted inverse-iteration step; keep it only if it helps."""
    n = a.shape[0]
    shift = lam + 1e-12 * (1.0 + abs(lam))
    try:
        w = np.linalg.solve(a - shift * np.eye(n), v)
    except np.linalg.LinAlgError:
        return lam, v
    nw = np.linalg.norm(w)
    if not np.isfinite(nw) or nw == 0.0:
        return lam, v
    w /= nw
    lam_new = complex(np.vdot(w, a @ w))
    if np.linalg.norm(a @ w - lam_new * w) < np.linalg.norm(a @ v - lam * v):
        return lam_new, w
    return lam, v


def general_eig(m) -> tuple[list[EigenPair], bool]:
    """Eigendecomposition of a general complex matrix.

    Returns the eigenpairs sorted ascending by real part (then imaginary
    part) together with a degeneracy flag that is set when two eigenvalues
    lie closer than DEGENERACY_TOL relative to |trace|.  Eigenvalues keep
    their imaginary parts; nothing is silently truncated to real.
    """
    a = as_cmat(m)
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"general eigensolver failed: {exc}") from exc
    order = np.lexsort((vals.imag, vals.real))
    scale = max(np.linalg.norm(a), 1.0)
    pairs = []
    for idx in order:
        lam, v = vals[idx], vecs[:, idx]
        v = v / np.linalg.norm(v)
        if np.linalg.norm(a @ v - lam * v) > EIG_TOL * scale:
            lam, v = _polish_pair(a, complex(lam), v)
        if np.linalg.norm(a @ v - lam * v) > EIG_TOL * scale:
            raise ConvergenceFailure(
                f"eigenpair residual above {EIG_TOL:.1e} after refinement"
            )
        pairs.append(EigenPair(complex(lam), phase_fix(v)))
    gap_scale = max(abs(np.trace(a)), 1e-16)
    sorted_re = np.sort(vals.real)
    degenerate = bool(np.any(np.diff(sorted_re) < DEGENERACY_TOL * gap_scale))
    return pairs, degenerate


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a Hermitian matrix (PSD test helper)."""
    a = as_cmat(m)
    h = _herm_part(a)
    return float(np.linalg.eigvalsh(h)[0])
