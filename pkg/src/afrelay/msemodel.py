"""Analytic Bayesian MSE of the two-hop link for given precoders/equalizers.

Averaging the per-subcarrier squared error over the data, both hop noises
and both estimation errors leaves a closed form that depends on the channel
estimates and the per-subcarrier error matrices only:

* the expected first-hop signal covariance seen by the relay is
  ``Pi_k = Tr(R_s psi_sr_k) I + Hsr_k R_s Hsr_k^H``,
* the relay receive covariance is ``R_x_k = Pi_k + sigma_n1^2 I``,
* propagated estimation error and destination noise act through
  ``eta_k = Tr(F_k R_x_k F_k^H psi_rd_k) + sigma_n2^2``,
* the per-subcarrier MSE is
  ``Tr(G (Hrd F R_x F^H Hrd^H + eta I) G^H) - 2 Re Tr(R_s Hsr^H F^H Hrd^H G^H)
  + Tr(R_s)``.

This module is the oracle the Monte Carlo engine is validated against, and
the objective the solver minimizes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .estimation import ChannelEstimate
from .numerics import hermitian_part

__all__ = [
    "LinkModel",
    "link_model",
    "compute_pi",
    "signal_statistics",
    "effective_noise",
    "per_subcarrier_mse",
    "total_mse",
    "mse_floor",
]


@dataclass(frozen=True)
class LinkModel:
    """Everything the design and its evaluation need on one link realisation.

    Shapes: ``h_sr_hat (K, M_R, N_S)``, ``h_rd_hat (K, M_D, N_R)``,
    ``psi_sr (K, N_S, N_S)``, ``psi_rd (K, N_R, N_R)``, ``r_s (K, N_S, N_S)``.
    """

    h_sr_hat: np.ndarray
    h_rd_hat: np.ndarray
    psi_sr: np.ndarray
    psi_rd: np.ndarray
    r_s: np.ndarray
    sigma_n1_sq: float
    sigma_n2_sq: float

    @property
    def k(self) -> int:
        return self.h_sr_hat.shape[0]

    @property
    def n_s(self) -> int:
        return self.h_sr_hat.shape[2]

    @property
    def m_r(self) -> int:
        return self.h_sr_hat.shape[1]

    @property
    def n_r(self) -> int:
        return self.h_rd_hat.shape[2]

    @property
    def m_d(self) -> int:
        return self.h_rd_hat.shape[1]

    def without_error_moments(self) -> "LinkModel":
        """Same link with both error matrices zeroed."""
        return replace(
            self, psi_sr=np.zeros_like(self.psi_sr), psi_rd=np.zeros_like(self.psi_rd)
        )

    def estimated_csi_view(self) -> "LinkModel":
        """The link as the estimated-CSI-only baseline designs against it.

        Error matrices are dropped wherever they stand for unknown error
        statistics, i.e. ``psi_rd`` is zeroed.  ``psi_sr`` is kept because it
        enters the design only through the relay receive covariance, which a
        relay measures from its input signal without any channel knowledge;
        zeroing it would let the baseline overdraw the physical transmit
        power budget.
        """
        return replace(self, psi_rd=np.zeros_like(self.psi_rd))


def link_model(
    est_sr: ChannelEstimate,
    est_rd: ChannelEstimate,
    r_s: np.ndarray,
    sigma_n1_sq: float,
    sigma_n2_sq: float,
) -> LinkModel:
    """Assemble a :class:`LinkModel` from the two hop estimates.

    ``r_s`` may be a single matrix (shared by all subcarriers) or one per
    subcarrier.
    """
    k = est_sr.subcarrier.shape[0]
    if est_rd.subcarrier.shape[0] != k:
        raise ValueError("hop estimates disagree on the number of subcarriers")
    r_s = np.asarray(r_s, dtype=complex)
    if r_s.ndim == 2:
        r_s = np.broadcast_to(r_s, (k,) + r_s.shape).copy()
    return LinkModel(
        h_sr_hat=est_sr.subcarrier,
        h_rd_hat=est_rd.subcarrier,
        psi_sr=est_sr.moments.psi,
        psi_rd=est_rd.moments.psi,
        r_s=r_s,
        sigma_n1_sq=float(sigma_n1_sq),
        sigma_n2_sq=float(sigma_n2_sq),
    )


def compute_pi(h_sr_hat_k: np.ndarray, r_s_k: np.ndarray, psi_sr_k: np.ndarray) -> np.ndarray:
    """Expected relay-side signal covariance on one subcarrier."""
    m_r = h_sr_hat_k.shape[0]
    if psi_sr_k.shape != r_s_k.shape:
        raise ValueError("psi_sr and R_s must share the source dimension")
    direct = h_sr_hat_k @ r_s_k @ h_sr_hat_k.conj().T
    return hermitian_part(np.trace(r_s_k @ psi_sr_k).real * np.eye(m_r) + direct)


def signal_statistics(model: LinkModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-subcarrier (Pi_k, R_x_k) stacks for a link model."""
    m_r = model.m_r
    h = model.h_sr_hat
    direct = h @ model.r_s @ np.conj(np.swapaxes(h, -1, -2))
    direct = 0.5 * (direct + np.conj(np.swapaxes(direct, -1, -2)))
    floor = np.einsum("kij,kji->k", model.r_s, model.psi_sr).real
    pi = direct + floor[:, None, None] * np.eye(m_r)
    r_x = pi + model.sigma_n1_sq * np.eye(m_r)
    return pi, r_x


def effective_noise(
    f_k: np.ndarray, r_x_k: np.ndarray, psi_rd_k: np.ndarray, sigma_n2_sq: float
) -> float:
    """eta_k: destination noise floor including propagated estimation error."""
    return float(np.trace(f_k @ r_x_k @ f_k.conj().T @ psi_rd_k).real) + sigma_n2_sq


def per_subcarrier_mse(f: np.ndarray, g: np.ndarray, model: LinkModel) -> np.ndarray:
    """Analytic MSE of each subcarrier for precoders ``f`` and equalizers ``g``."""
    _, r_x = signal_statistics(model)
    f_h = np.conj(np.swapaxes(f, -1, -2))
    g_h = np.conj(np.swapaxes(g, -1, -2))
    hrd_h = np.conj(np.swapaxes(model.h_rd_hat, -1, -2))
    relay_out = f @ r_x @ f_h  # covariance of the relay transmit signal
    eta = (
        np.einsum("kij,kji->k", relay_out, model.psi_rd).real + model.sigma_n2_sq
    )
    core = model.h_rd_hat @ relay_out @ hrd_h
    g_core = np.einsum("kij,kjl,kli->k", g, core, g_h).real
    g_power = np.einsum("kij,kji->k", g, g_h).real
    chain = model.h_rd_hat @ f @ model.h_sr_hat
    cross = np.einsum("kij,kjl,kli->k", model.r_s, np.conj(np.swapaxes(chain, -1, -2)), g_h)
    source = np.einsum("kii->k", model.r_s).real
    return g_core + eta * g_power - 2.0 * cross.real + source


def total_mse(solution, model: LinkModel) -> float:
    """Sum of the per-subcarrier analytic MSEs of a transceiver solution."""
    return float(per_subcarrier_mse(solution.f, solution.g, model).sum())


def mse_floor(model: LinkModel) -> np.ndarray:
    """Per-subcarrier MSE floor: the part no precoder or equalizer can remove."""
    _, r_x = signal_statistics(model)
    out = np.zeros(model.k)
    for k in range(model.k):
        hsr, rs = model.h_sr_hat[k], model.r_s[k]
        gain = rs @ hsr.conj().T @ np.linalg.solve(r_x[k], hsr @ rs)
        out[k] = np.trace(rs).real - np.trace(gain).real
    return out
