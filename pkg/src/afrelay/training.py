"""Training-sequence design for time-domain channel estimation.

Training enters the estimator only through the Gram matrix ``D D^H`` of the
block-circulant data matrix ``D`` stacked from the time-domain training
vectors.  We target Grams of the form ``I_L kron (K * C)`` where ``C`` is a
tx x tx exponential spatial-correlation matrix with off-diagonals
``alpha**|i-j|``: training white in time, optionally correlated in space.
``alpha = 0`` gives ``D D^H = K I`` and, downstream, estimation errors that
are white across antennas and identical on every subcarrier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IdentifiabilityError",
    "TrainingDesign",
    "exponential_correlation",
    "build_gram",
    "materialize_sequence",
    "data_matrix",
]


class IdentifiabilityError(ValueError):
    """Training too short to identify all tap coefficients."""


@dataclass(frozen=True)
class TrainingDesign:
    """Training block length K, tap count L, antennas tx, and the Gram DD^H."""

    k: int
    l: int
    tx: int
    alpha: float
    gram: np.ndarray


def exponential_correlation(tx: int, alpha: float) -> np.ndarray:
    """tx x tx matrix with entries alpha**|i-j| (unit diagonal)."""
    idx = np.arange(tx)
    return alpha ** np.abs(np.subtract.outer(idx, idx)).astype(float)


def build_gram(k: int, l: int, tx: int, alpha: float) -> TrainingDesign:
    """Training design with Gram ``I_L kron (K * C(alpha))``."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    if k < l * tx:
        raise IdentifiabilityError(
            f"K={k} training samples cannot identify L*tx={l * tx} tap columns"
        )
    corr = exponential_correlation(tx, alpha)
    gram = np.kron(np.eye(l), k * corr)
    return TrainingDesign(k=k, l=l, tx=tx, alpha=alpha, gram=gram)


def materialize_sequence(design: TrainingDesign, rng: np.random.Generator) -> np.ndarray:
    """Time-domain training block d_0..d_{K-1} (shape (K, tx)) matching the Gram.

    Per antenna the frequency-domain pilots are unit-modulus with a linear
    phase ramp of slope L carriers per antenna index, which makes the
    time-domain sequence exactly white at all lags shorter than L; a Cholesky
    factor of the spatial correlation then colours the antennas.  A random
    common phase per carrier is applied, which leaves the Gram untouched.
    """
    k, l, tx, alpha = design.k, design.l, design.tx, design.alpha
    carriers = np.arange(k)
    ramp = np.exp(2j * np.pi * np.outer(carriers, l * np.arange(tx)) / k)
    common = np.exp(2j * np.pi * rng.random(k))[:, None]
    pilots = common * ramp  # (K, tx) frequency-domain, one vector per carrier
    chol = np.linalg.cholesky(exponential_correlation(tx, alpha)) if alpha else np.eye(tx)
    pilots = pilots @ chol.T
    idft = np.exp(2j * np.pi * np.outer(np.arange(k), carriers) / k) / np.sqrt(k)
    d = idft @ pilots  # d_i = sum_k pilots_k exp(2j*pi*k*i/K)/sqrt(K)
    achieved = data_matrix(d, l)
    gap = np.linalg.norm(achieved @ achieved.conj().T - design.gram)
    if gap > 1e-6 * np.linalg.norm(design.gram):
        raise RuntimeError("materialized training failed to reach the target Gram")
    return d


def data_matrix(d: np.ndarray, l: int) -> np.ndarray:
    """Block-circulant (L*tx, K) data matrix with column i holding d_{i-l mod K}."""
    k, tx = d.shape
    out = np.zeros((l * tx, k), dtype=complex)
    for shift in range(l):
        out[shift * tx : (shift + 1) * tx, :] = d[(np.arange(k) - shift) % k].T
    return out
