"""Two-qubit state domain: density matrices, pure states, partial
transposition, concurrence, Schmidt machinery, separability, and seeded
random state generation.

Basis convention everywhere: |00>, |01>, |10>, |11>, row-major, with the
first factor ("A") owning the slow index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .mat4 import SPIN_FLIP, as_cmat, dagger
from .tolerances import (
    C_TOL,
    HERMITICITY_TOL,
    NORM_TOL,
    PSD_TOL,
    RANK_TOL,
    REPAIR_TOL,
)

__all__ = [
    "NotNormalized",
    "InvalidRank",
    "InvalidDensityMatrix",
    "NotEntangled",
    "PureState",
    "DensityMatrix",
    "SchmidtForm",
    "SeparabilityResult",
    "partial_transpose_b",
    "partial_transpose_a",
    "concurrence_pure",
    "concurrence_spectrum",
    "concurrence_mixed",
    "schmidt",
    "is_separable",
    "is_maximally_entangled",
    "random_pure",
    "random_max_entangled",
    "random_su2",
    "random_density",
]


class NotNormalized(ValueError):
    """Pure-state amplitudes are not unit norm within tolerance."""


class InvalidRank(ValueError):
    """Requested or required rank is outside 1..4."""


class InvalidDensityMatrix(ValueError):
    """Matrix fails the density-matrix contract beyond the repair window."""


class NotEntangled(ValueError):
    """Operation requires an entangled input state."""


class PureState:
    """Normalized complex 4-vector in the product basis.

    Construction repairs a norm drift up to NORM_TOL and rejects anything
    larger; use `PureState.normalized` to build from an arbitrary nonzero
    vector.
    """

    __slots__ = ("_amp",)

    def __init__(self, amp):
        a = np.array(amp, dtype=complex).reshape(-1)
        if a.shape != (4,):
            raise ValueError(f"expected 4 amplitudes, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"state norm {norm!r} is not 1 within {NORM_TOL}")
        a /= norm
        a.setflags(write=False)
        self._amp = a

    @classmethod
    def normalized(cls, vec) -> "PureState":
        """Build from any nonzero 4-vector, normalizing it."""
        v = np.asarray(vec, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm < 1e-12:
            raise NotNormalized("cannot normalize a (near-)zero vector")
        return cls(v / norm)

    @property
    def amp(self) -> np.ndarray:
        return self._amp

    def projector(self) -> np.ndarray:
        return np.outer(self._amp, self._amp.conj())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self._amp, other._amp))

    def __repr__(self):
        return f"PureState({np.array2string(self._amp, precision=6)})"


class DensityMatrix:
    """4x4 Hermitian, unit-trace, positive-semidefinite matrix.

    The constructor averages away asymmetry and renormalizes the trace when
    the deviation is below REPAIR_TOL (serialization round-off) and rejects
    anything larger.  The numerical rank is cached at construction.
    """

    __slots__ = ("_mat", "_eigvals", "_rank")

    def __init__(self, mat):
        a = as_cmat(mat, dim=4)
        asym = np.max(np.abs(a - dagger(a)))
        if asym > REPAIR_TOL:
            raise InvalidDensityMatrix(f"asymmetry {asym:.3e} exceeds {REPAIR_TOL}")
        a = (a + dagger(a)) / 2.0
        tr = float(np.trace(a).real)
        if abs(tr - 1.0) > REPAIR_TOL:
            raise InvalidDensityMatrix(f"trace {tr!r} is not 1 within {REPAIR_TOL}")
        a /= tr
        eigvals = np.linalg.eigvalsh(a)
        if eigvals[0] < -PSD_TOL:
            raise InvalidDensityMatrix(
                f"smallest eigenvalue {eigvals[0]:.3e} below -{PSD_TOL}"
            )
        a.setflags(write=False)
        self._mat = a
        self._eigvals = eigvals
        self._rank = int(np.count_nonzero(eigvals > RANK_TOL))

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return cls(psi.projector())

    @classmethod
    def from_mixture(cls, weights, states) -> "DensityMatrix":
        """Convex mixture of pure states."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be a probability vector")
        acc = np.zeros((4, 4), dtype=complex)
        for wi, si in zip(w, states):
            acc += wi * si.projector()
        return cls(acc)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(4) / 4.0)

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def eigvals(self) -> np.ndarray:
        return self._eigvals

    @property
    def rank(self) -> int:
        return self._rank

    def __repr__(self):
        return f"DensityMatrix(rank={self._rank})"


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    return as_cmat(rho, dim=4)


def partial_transpose_b(rho) -> np.ndarray:
    """Transpose the second factor's indices only.

    Output entry ((i,j),(k,l)) equals input entry ((i,l),(k,j)); the map is
    an exact entrywise involution and preserves Hermiticity.
    """
    m = _as_matrix(rho)
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def partial_transpose_a(rho) -> np.ndarray:
    """Transpose the first factor's indices only."""
    m = _as_matrix(rho)
    return m.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)


def _amp_of(psi) -> np.ndarray:
    if isinstance(psi, PureState):
        return psi.amp
    a = np.asarray(psi, dtype=complex).reshape(-1)
    if a.shape != (4,):
        raise ValueError(f"expected 4 amplitudes, got shape {a.shape}")
    norm = np.linalg.norm(a)
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalized(f"state norm {norm!r} is not 1 within {NORM_TOL}")
    return a


def concurrence_pure(psi) -> float:
    """Concurrence of a pure state: 2|a1*a4 - a2*a3|."""
    a = _amp_of(psi)
    return float(2.0 * abs(a[0] * a[3] - a[1] * a[2]))


def concurrence_spectrum(rho: DensityMatrix) -> np.ndarray:
    """Descending square roots of the spin-flipped overlap spectrum.

    Computed through the Hermitian route: the eigenvalues of
    sqrt(rho) S rho* S sqrt(rho) coincide with those of S rho* S rho but
    come from a Hermitian PSD matrix, which is numerically safer.
    """
    m = _as_matrix(rho)
    w, v = np.linalg.eigh(m)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)
    flipped = SPIN_FLIP @ m.conj() @ SPIN_FLIP
    herm = sqrt_rho @ flipped @ sqrt_rho
    vals = np.linalg.eigvalsh((herm + dagger(herm)) / 2.0)
    c = np.sqrt(np.clip(vals, 0.0, None))
    return c[::-1].copy()


def concurrence_mixed(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    c = concurrence_spectrum(rho)
    return float(max(0.0, c[0] - c[1] - c[2] - c[3]))


@dataclass(frozen=True)
class SchmidtForm:
    """Schmidt data of a pure state.

    `coeffs` are the singular values (l1 >= l2 >= 0, l1^2 + l2^2 = 1) of the
    2x2 amplitude matrix; applying basis_a (x) basis_b to the state yields
    the amplitudes [l1, 0, 0, l2].
    """

    coeffs: tuple[float, float]
    basis_a: np.ndarray
    basis_b: np.ndarray

    def rebuild(self) -> PureState:
        """Invert the local basis change; reproduces the original state."""
        vec = np.array([self.coeffs[0], 0.0, 0.0, self.coeffs[1]], dtype=complex)
        local = np.kron(self.basis_a, self.basis_b)
        return PureState.normalized(dagger(local) @ vec)


def schmidt(psi) -> SchmidtForm:
    """Schmidt decomposition via SVD of the reshaped amplitude matrix."""
    a = _amp_of(psi).reshape(2, 2)
    u, s, vh = np.linalg.svd(a)
    return SchmidtForm(
        coeffs=(float(s[0]), float(s[1])),
        basis_a=dagger(u),
        basis_b=vh.conj(),
    )


class SeparabilityResult(NamedTuple):
    separable: bool
    margin: float


def is_separable(rho: DensityMatrix) -> SeparabilityResult:
    """Peres-Horodecki test; sufficient as well as necessary for 2x2.

    The margin is the smallest eigenvalue of the partial transpose;
    separable means margin >= -PSD_TOL.
    """
    margin = float(np.linalg.eigvalsh(partial_transpose_b(rho))[0])
    return SeparabilityResult(margin >= -PSD_TOL, margin)


def is_maximally_entangled(psi, tol: float = C_TOL) -> bool:
    """True iff the pure-state concurrence reaches 1 within `tol`."""
    return concurrence_pure(psi) >= 1.0 - tol


def random_pure(rng: np.random.Generator) -> PureState:
    """Haar-distributed pure state."""
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return PureState.normalized(v)


def random_max_entangled(rng: np.random.Generator) -> PureState:
    """Random maximally entangled state.

    Uses the general form [a1, a2, -s*conj(a2), s*conj(a1)] with
    |a1|^2 + |a2|^2 = 1/2 and a random sign s.
    """
    a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    a /= np.linalg.norm(a) * np.sqrt(2.0)
    s = 1.0 if rng.random() < 0.5 else -1.0
    return PureState([a[0], a[1], -s * a[1].conjugate(), s * a[0].conjugate()])


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(2) matrix."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    a = q[0] + 1j * q[1]
    b = q[2] + 1j * q[3]
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def random_density(rank: int, seed: int) -> DensityMatrix:
    """Seeded random density matrix of the requested numerical rank.

    Mixes `rank` Haar-random pure states with Dirichlet simplex weights,
    redrawing (deterministically) in the rare event the numerical rank
    collapses.
    """
    if not 1 <= int(rank) <= 4:
        raise InvalidRank(f"rank must be 1..4, got {rank}")
    rank = int(rank)
    rng = np.random.default_rng(seed)
    for _ in range(64):
        states = [random_pure(rng) for _ in range(rank)]
        weights = rng.dirichlet(np.ones(rank)) if rank > 1 else np.ones(1)
        rho = DensityMatrix.from_mixture(weights, states)
        if rho.rank == rank:
            return rho
    raise RuntimeError(f"could not realize rank {rank} from seed {seed}")
