"""Channel estimation from training and exact error second-order statistics.

Estimation runs in the time domain: the stacked training observation is
``r = (D^T kron I_rx) xi + v`` where ``xi`` stacks the vectorised taps and
``v`` is circular complex noise with variance ``sigma2``.  The linear MMSE
estimate and its error covariance follow from the normal equations; with an
uninformative tap prior they reduce to maximum-likelihood estimation, which
is the default throughout the package.

The time-domain error covariance factors as ``phi kron I_rx`` with ``phi`` a
(L*tx, L*tx) matrix.  Everything the transceiver design needs downstream is
derived from ``phi``:

* per-subcarrier error matrices ``psi[k]`` (tx x tx) obtained by a double
  DFT sum over tap-block pairs of ``phi`` (transposed blocks), and
* the closed form ``E{dH R dH^H} = Tr(R psi[k]) * I`` for any square R,
  which holds for any error distribution with these second-order moments.

Sampling estimation errors is done in the time domain and mapped to the
subcarriers afterwards, so the cross-subcarrier error correlation implied by
``phi`` is preserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import MultipathChannel, standard_complex, subcarrier_phases, to_frequency
from .numerics import hermitian_part, hermitian_sqrt_psd
from .training import IdentifiabilityError, TrainingDesign, data_matrix

__all__ = [
    "ErrorMoments",
    "ChannelEstimate",
    "error_moments",
    "white_error_moments",
    "psi_from_phi",
    "estimator_matrix",
    "lmmse_estimate",
    "simulate_training",
    "sample_estimate",
    "expected_sandwich",
    "moments_to_csv",
]


@dataclass(frozen=True)
class ErrorMoments:
    """Second-order statistics of the tap-estimation error for one hop.

    ``phi`` is the (L*tx, L*tx) time-domain error covariance factor (the full
    covariance is ``phi kron I_rx``); ``psi`` holds the K per-subcarrier
    tx x tx error matrices; ``sigma_e2`` is the observation noise variance
    used during estimation.
    """

    phi: np.ndarray
    psi: np.ndarray
    sigma_e2: float

    @property
    def k(self) -> int:
        return self.psi.shape[0]


@dataclass(frozen=True)
class ChannelEstimate:
    """Per-subcarrier channel estimate (K, rx, tx) with its error moments."""

    subcarrier: np.ndarray
    moments: ErrorMoments


def psi_from_phi(phi: np.ndarray, l: int, tx: int, k: int) -> np.ndarray:
    """Per-subcarrier error matrices from the time-domain covariance factor.

    ``psi[k] = sum_{l1,l2} exp(-2j*pi*k*(l1-l2)/K) * phi_block(l1,l2)^T``.
    """
    blocks = np.asarray(phi, dtype=complex).reshape(l, tx, l, tx)
    phases = subcarrier_phases(k, l)  # exp(-2j*pi*k*l/K)
    weight = np.einsum("ka,kb->kab", phases, phases.conj())
    # Transposed (l1, l2) block: indices (j, i) of phi.
    psi = np.einsum("kab,ajbi->kij", weight, blocks)
    return 0.5 * (psi + np.conj(np.transpose(psi, (0, 2, 1))))


def _prior_inverse(prior_tap_variances, l: int, tx: int) -> np.ndarray | None:
    if prior_tap_variances is None:
        return None
    prior = np.asarray(prior_tap_variances, dtype=float)
    if prior.shape != (l,) or np.any(prior <= 0.0):
        raise ValueError("prior tap variances must be L positive reals")
    return np.kron(np.diag(1.0 / prior), np.eye(tx))


def error_moments(
    design: TrainingDesign,
    sigma_e2: float,
    prior_tap_variances=None,
) -> ErrorMoments:
    """Estimation-error moments implied by a training design.

    ``prior_tap_variances=None`` selects the uninformative prior (ML
    estimation), in which case ``phi = sigma_e2 * (D* D^T)^{-1}``.
    ``sigma_e2 = 0`` models perfect estimation.
    """
    if sigma_e2 < 0.0:
        raise ValueError("noise variance must be nonnegative")
    l, tx, k = design.l, design.tx, design.k
    dim = l * tx
    if sigma_e2 == 0.0:
        phi = np.zeros((dim, dim), dtype=complex)
    else:
        normal = design.gram.conj() / sigma_e2  # D* D^T = conj(D D^H)
        prior_inv = _prior_inverse(prior_tap_variances, l, tx)
        if prior_inv is not None:
            normal = normal + prior_inv
        phi = hermitian_part(np.linalg.inv(normal))
    return ErrorMoments(phi=phi, psi=psi_from_phi(phi, l, tx, k), sigma_e2=float(sigma_e2))


def white_error_moments(k: int, l: int, tx: int, sigma_e2: float) -> ErrorMoments:
    """ML error moments of ideal white training in closed form.

    Equals :func:`error_moments` of a zero-correlation design: the
    time-domain factor is ``(sigma_e2/K) I`` and every subcarrier sees the
    same error matrix ``(L/K) sigma_e2 I``.
    """
    dim = l * tx
    phi = (sigma_e2 / k) * np.eye(dim, dtype=complex)
    psi = np.broadcast_to(
        (l * sigma_e2 / k) * np.eye(tx, dtype=complex), (k, tx, tx)
    ).copy()
    return ErrorMoments(phi=phi, psi=psi, sigma_e2=float(sigma_e2))


def _observation_matrix(d: np.ndarray, l: int, rx: int) -> np.ndarray:
    return np.kron(data_matrix(d, l).T, np.eye(rx))


def simulate_training(
    channel: MultipathChannel,
    d: np.ndarray,
    sigma2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Noisy time-domain training observation of a channel (stacked, K*rx)."""
    l, rx = channel.n_taps, channel.rx
    xi = _vec_taps(channel.taps)
    clean = _observation_matrix(d, l, rx) @ xi
    return clean + np.sqrt(sigma2) * standard_complex(rng, clean.shape)


def _vec_taps(taps: np.ndarray) -> np.ndarray:
    # Stacks vec([tap_0 ... tap_{L-1}]): index (l, column, row), row fastest.
    l, rx, tx = taps.shape
    return taps.transpose(0, 2, 1).reshape(l * tx * rx)


def _unvec_taps(xi: np.ndarray, l: int, rx: int, tx: int) -> np.ndarray:
    return xi.reshape(l, tx, rx).transpose(0, 2, 1)


def estimator_matrix(
    d: np.ndarray,
    l: int,
    rx: int,
    sigma2: float,
    prior_tap_variances=None,
) -> np.ndarray:
    """Matrix W with ``xi_hat = W @ received`` for the configured estimator."""
    tx = d.shape[1]
    a = _observation_matrix(d, l, rx)
    rhs = a.conj().T
    if sigma2 == 0.0:
        # Noiseless observations override any finite prior.
        normal = a.conj().T @ a
    else:
        normal = a.conj().T @ a / sigma2
        rhs = rhs / sigma2
        prior_inv = _prior_inverse(prior_tap_variances, l, tx)
        if prior_inv is not None:
            normal = normal + np.kron(prior_inv, np.eye(rx))
    try:
        return np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as exc:
        raise IdentifiabilityError(
            "normal equations singular: training does not excite all tap columns"
        ) from exc


def lmmse_estimate(
    received: np.ndarray,
    d: np.ndarray,
    l: int,
    rx: int,
    sigma2: float,
    prior_tap_variances=None,
) -> np.ndarray:
    """Tap estimate (L, rx, tx) from a stacked training observation.

    With ``prior_tap_variances=None`` this is the ML (least-squares)
    estimate; otherwise the LMMSE estimate for independent zero-mean taps
    with the given per-tap variances.
    """
    tx = d.shape[1]
    w = estimator_matrix(d, l, rx, sigma2, prior_tap_variances)
    return _unvec_taps(w @ received, l, rx, tx)


def sample_estimate(
    truth: MultipathChannel,
    moments: ErrorMoments,
    k: int,
    rng: np.random.Generator,
) -> ChannelEstimate:
    """Draw an estimate consistent with ``truth`` and the given error moments.

    The tap error is sampled with covariance ``phi kron I_rx`` and subtracted
    from the true taps, then both are mapped to the K subcarriers, so errors
    on different subcarriers carry their exact mutual correlation.
    """
    l, rx, tx = truth.n_taps, truth.rx, truth.tx
    if moments.phi.shape != (l * tx, l * tx):
        raise ValueError("moments do not match the channel dimensions")
    h_freq = to_frequency(truth, k)
    if moments.sigma_e2 == 0.0 and not moments.phi.any():
        return ChannelEstimate(subcarrier=h_freq, moments=moments)
    root = hermitian_sqrt_psd(moments.phi)
    w = standard_complex(rng, (rx, l * tx))
    err_cols = w @ root.T  # vec-cov = phi kron I_rx
    err_taps = err_cols.reshape(rx, l, tx).transpose(1, 0, 2)
    phases = subcarrier_phases(k, l)
    err_freq = np.einsum("kl,lij->kij", phases, err_taps)
    return ChannelEstimate(subcarrier=h_freq - err_freq, moments=moments)


def moments_to_csv(moments: ErrorMoments) -> str:
    """Serialize error moments as text: phi rows then per-subcarrier psi rows."""
    dim = moments.phi.shape[0]
    tx = moments.psi.shape[1]
    lines = [
        f"# afrelay-moments v1 dim={dim} tx={tx} k={moments.k} "
        f"sigma_e2={moments.sigma_e2!r}"
    ]
    for r in range(dim):
        cells = []
        for c in range(dim):
            z = moments.phi[r, c]
            cells.extend((repr(float(z.real)), repr(float(z.imag))))
        lines.append(f"phi,{r}," + ",".join(cells))
    for k in range(moments.k):
        for r in range(tx):
            cells = []
            for c in range(tx):
                z = moments.psi[k, r, c]
                cells.extend((repr(float(z.real)), repr(float(z.imag))))
            lines.append(f"psi,{k},{r}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def expected_sandwich(psi: np.ndarray, r: np.ndarray, out_dim: int) -> np.ndarray:
    """Closed form of E{dH R dH^H}: ``Tr(R psi) * I_out_dim``."""
    psi = np.asarray(psi)
    r = np.asarray(r)
    if psi.shape != r.shape or psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
        raise ValueError(f"R must be square with psi's shape, got {r.shape} vs {psi.shape}")
    return np.trace(r @ psi) * np.eye(out_dim)
