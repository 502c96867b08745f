"""Spectra of the two companion matrices built from a density matrix.

X = S rho* S rho carries the concurrence; Y = S rho^{T_A} S rho^{T_B}
carries the separability weight through its smallest eigenvalue gamma.
The report cross-checks the known identities between the two spectra:
the four signed combinations relating them, the power-trace identities
with their cubic/quartic corrections, and the sign pattern of the
partial-transpose expectations over Y's eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mat4 import SPIN_FLIP, general_eig
from .tolerances import DEGENERACY_TOL
from .qstate import (
    DensityMatrix,
    PureState,
    concurrence_spectrum,
    partial_transpose_a,
    partial_transpose_b,
)

__all__ = ["SpectralReport", "build_X", "build_Y", "spectral_report", "delta_corrections"]


@dataclass(frozen=True)
class SpectralReport:
    """Joint spectral data of X and Y for one density matrix.

    `c` and `d` are both descending; `sign_diagnostics[i]` is the
    expectation of rho^{T_B} in the eigenvector of Y paired with `d[i]`,
    so the last entry belongs to the eigenvector at gamma (`phi4`).
    `trace_residuals[k-1]` is |Tr Y^k - (Tr X^k - delta_k)| with delta_1 = 0.
    `delta` holds (delta2, delta3, delta4, sqrt(det X)).
    """

    c: np.ndarray
    d: np.ndarray
    gamma: float
    phi4: PureState
    degenerate_gamma: bool
    trace_residuals: np.ndarray
    sign_diagnostics: np.ndarray
    delta: tuple[float, float, float, float]


def _mat(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def build_X(rho) -> np.ndarray:
    """Spin-flipped overlap matrix S rho* S rho."""
    m = _mat(rho)
    return SPIN_FLIP @ m.conj() @ SPIN_FLIP @ m


def build_Y(rho) -> np.ndarray:
    """Partial-transpose companion S rho^{T_A} S rho^{T_B}.

    Because rho^{T_B} is Hermitian, rho^{T_A} equals its entrywise
    conjugate, so this is also S (rho^{T_B})* S rho^{T_B}.
    """
    m = _mat(rho)
    return SPIN_FLIP @ partial_transpose_a(m) @ SPIN_FLIP @ partial_transpose_b(m)


def delta_corrections(x: np.ndarray) -> tuple[float, float, float, float]:
    """Corrections (delta2, delta3, delta4, sqrt(det X)) for the power traces.

    The square root of det X is taken with the positive sign, which is the
    branch selected by positivity of the underlying state (it equals
    det rho >= 0).
    """
    t1 = float(np.trace(x).real)
    t2 = float(np.trace(x @ x).real)
    d = float(np.sqrt(max(np.linalg.det(x).real, 0.0)))
    delta2 = 6.0 * d + 1.5 * t2 - 0.75 * t1 * t1
    delta3 = 1.25 * delta2 * t1
    delta4 = (7.0 / 12.0) * delta2 * (2.0 * t2 + t1 * t1 - delta2)
    return delta2, delta3, delta4, d


def spectral_report(rho: DensityMatrix) -> SpectralReport:
    """Assemble the joint c/d spectral data with identity residuals."""
    c = concurrence_spectrum(rho)
    x = build_X(rho)
    y = build_Y(rho)
    rho_tb = partial_transpose_b(rho)

    pairs, _ = general_eig(y)  # ascending by real part
    yvals = np.array([p.value.real for p in pairs])
    gamma = float(max(yvals[0], 0.0))
    d = 2.0 * np.sqrt(np.clip(yvals, 0.0, None))[::-1].copy()
    phi4 = PureState(pairs[0].vector)

    gap_scale = max(abs(np.trace(y).real), 1e-16)
    gap = yvals[1] - yvals[0]
    degenerate_gamma = bool(gap < DEGENERACY_TOL * gap_scale) or rho.rank < 3

    delta2, delta3, delta4, d_det = delta_corrections(x)
    deltas = (0.0, delta2, delta3, delta4)
    residuals = np.empty(4)
    xp = np.eye(4, dtype=complex)
    yp = np.eye(4, dtype=complex)
    for k in range(4):
        xp = xp @ x
        yp = yp @ y
        residuals[k] = abs(np.trace(yp).real - (np.trace(xp).real - deltas[k]))

    signs = np.array(
        [float(np.real(np.vdot(p.vector, rho_tb @ p.vector))) for p in pairs]
    )[::-1].copy()

    return SpectralReport(
        c=c,
        d=d,
        gamma=gamma,
        phi4=phi4,
        degenerate_gamma=degenerate_gamma,
        trace_residuals=residuals,
        sign_diagnostics=signs,
        delta=(delta2, delta3, delta4, d_det),
    )
