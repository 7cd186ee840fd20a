"""Deterministic complex linear-algebra primitives shared by every module.

Conventions fixed here so results are reproducible bit-for-bit:

* unitary DFT, ``1/sqrt(K)`` in both directions;
* singular values / eigenvalues always ordered non-increasing;
* each factor column is phase-rotated so that its largest-magnitude entry
  is real and positive (ties in the spectrum then cannot scramble
  regression fixtures);
* a spectrum entry counts as zero when it is below ``RANK_RTOL`` times the
  largest entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RANK_RTOL",
    "NumericsError",
    "DecompositionError",
    "HermitianContractError",
    "SingularMatrixError",
    "OrderedSVD",
    "OrderedEigh",
    "dft_matrix",
    "svd_ordered",
    "eigh_ordered",
    "hermitian_part",
    "hermitian_sqrt_psd",
    "hermitian_inv_sqrt",
    "kron",
    "spectrum_rank",
    "eigh_ordered_stack",
    "svd_ordered_stack",
    "hermitian_inv_sqrt_stack",
]

RANK_RTOL = 1e-10
_HERMITIAN_RTOL = 1e-12


class NumericsError(Exception):
    """Base class for numeric contract failures."""


class DecompositionError(NumericsError):
    """A matrix factorisation backend did not converge."""


class HermitianContractError(NumericsError):
    """An operation requiring a Hermitian input received a non-Hermitian one."""


class SingularMatrixError(NumericsError):
    """A matrix required to be positive definite is numerically singular."""


@dataclass(frozen=True)
class OrderedSVD:
    """SVD ``A = U diag(s) V^H`` with ``s`` non-increasing."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class OrderedEigh:
    """Hermitian eigendecomposition ``A = U diag(w) U^H`` with ``w`` non-increasing."""

    u: np.ndarray
    eigenvalues: np.ndarray


def dft_matrix(k: int) -> np.ndarray:
    """Unitary K x K DFT matrix, entry (m, n) = exp(-2j*pi*m*n/K)/sqrt(K)."""
    if k < 1:
        raise ValueError(f"DFT size must be >= 1, got {k}")
    m = np.arange(k)
    return np.exp(-2j * np.pi * np.outer(m, m) / k) / np.sqrt(k)


def _canonicalize_columns(u: np.ndarray) -> np.ndarray:
    """Phase factors that make each column's largest-|.| entry real positive."""
    if u.shape[1] == 0:
        return np.ones(0, dtype=complex)
    idx = np.argmax(np.abs(u), axis=0)
    pivots = u[idx, np.arange(u.shape[1])]
    mags = np.abs(pivots)
    phases = np.ones_like(pivots)
    nonzero = mags > 0.0
    phases[nonzero] = pivots[nonzero] / mags[nonzero]
    return phases.conj()


def svd_ordered(a: np.ndarray) -> OrderedSVD:
    """Reduced SVD with non-increasing singular values and canonical phases."""
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("svd_ordered requires finite entries")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge on a {a.shape} matrix") from exc
    # Same rotation on u and v columns keeps u diag(s) v^H invariant.
    phases = _canonicalize_columns(u)
    u = u * phases
    v = vh.conj().T * phases
    return OrderedSVD(u=u, singular_values=s, v=v)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """(A + A^H)/2, scrubbing rounding-level asymmetries."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def _require_hermitian(a: np.ndarray, op: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise HermitianContractError(f"{op} requires a square matrix, got {a.shape}")
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    if float(np.abs(a - a.conj().T).max()) > _HERMITIAN_RTOL * scale:
        raise HermitianContractError(f"{op} requires a Hermitian input")
    return hermitian_part(a)


def eigh_ordered(a: np.ndarray) -> OrderedEigh:
    """Hermitian eigendecomposition, eigenvalues non-increasing, canonical phases."""
    a = _require_hermitian(a, "eigh_ordered")
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigh did not converge on a {a.shape} matrix") from exc
    w = w[::-1].copy()
    u = u[:, ::-1]
    u = u * _canonicalize_columns(u)
    return OrderedEigh(u=u, eigenvalues=w)


def spectrum_rank(values: np.ndarray) -> int:
    """Number of spectrum entries above the relative rank cutoff."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0
    top = float(values.max())
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(values > RANK_RTOL * top))


def hermitian_sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Hermitian square root of a PSD matrix; rounding-level negatives clipped."""
    dec = eigh_ordered(a)
    top = float(dec.eigenvalues.max(initial=0.0))
    if top > 0.0 and float(dec.eigenvalues.min()) < -1e-10 * top:
        raise SingularMatrixError(
            f"matrix is not PSD: smallest eigenvalue {dec.eigenvalues.min():.3e}"
        )
    w = np.clip(dec.eigenvalues, 0.0, None)
    return hermitian_part((dec.u * np.sqrt(w)) @ dec.u.conj().T)


def hermitian_inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Hermitian B with B A B = I for Hermitian positive definite A."""
    dec = eigh_ordered(a)
    w = dec.eigenvalues
    top = float(w.max(initial=0.0))
    if top <= 0.0 or float(w.min()) <= RANK_RTOL * top:
        raise SingularMatrixError(
            f"hermitian_inv_sqrt requires a positive definite input; "
            f"offending eigenvalue {w.min() if w.size else 0.0:.6e}"
        )
    return hermitian_part((dec.u / np.sqrt(w)) @ dec.u.conj().T)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; satisfies (A x B)(C x D) = (AC) x (BD)."""
    return np.kron(np.asarray(a), np.asarray(b))


# Stacked variants: one gufunc call for a batch of small matrices.  Same
# ordering and phase conventions as the single-matrix operations.


def _canonicalize_stack(u: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(u), axis=1)  # (B, n) pivot row per column
    pivots = np.take_along_axis(u, idx[:, None, :], axis=1)[:, 0, :]
    mags = np.abs(pivots)
    phases = np.where(mags > 0.0, pivots / np.where(mags > 0.0, mags, 1.0), 1.0)
    return u * phases.conj()[:, None, :]


def eigh_ordered_stack(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-slice Hermitian eigendecomposition, eigenvalues non-increasing.

    Returns ``(w, u)`` with shapes ``(B, n)`` and ``(B, n, n)``.  Slices are
    symmetrized; callers guarantee Hermitian inputs.
    """
    a = np.asarray(a, dtype=complex)
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"stacked eigh did not converge on {a.shape}") from exc
    w = w[:, ::-1].copy()
    u = _canonicalize_stack(u[:, :, ::-1])
    return w, u


def svd_ordered_stack(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-slice reduced SVD ``(u, s, v)`` with canonical column phases."""
    a = np.asarray(a, dtype=complex)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"stacked SVD did not converge on {a.shape}") from exc
    idx = np.argmax(np.abs(u), axis=1)
    pivots = np.take_along_axis(u, idx[:, None, :], axis=1)[:, 0, :]
    mags = np.abs(pivots)
    phases = np.where(mags > 0.0, pivots / np.where(mags > 0.0, mags, 1.0), 1.0)
    u = u * phases.conj()[:, None, :]
    v = np.conj(np.swapaxes(vh, -1, -2)) * phases.conj()[:, None, :]
    return u, s, v


def hermitian_inv_sqrt_stack(a: np.ndarray) -> np.ndarray:
    """Per-slice Hermitian inverse square root of positive definite inputs."""
    w, u = eigh_ordered_stack(a)
    top = w[:, 0]
    if np.any(top <= 0.0) or np.any(w[:, -1] <= RANK_RTOL * top):
        worst = float(w.min())
        raise SingularMatrixError(
            f"stacked inverse square root requires positive definite slices; "
            f"offending eigenvalue {worst:.6e}"
        )
    out = (u / w[:, None, :] ** 0.5) @ np.conj(np.swapaxes(u, -1, -2))
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
