"""Closed-form robust relay precoder and destination equalizer design.

The total-MSE minimization under the relay transmit-power budget splits, via
its first-order optimality system, into a per-subcarrier eigenstructure and a
power allocation over subcarriers coupled by one shared multiplier ``gamma``:

* On each subcarrier two decompositions fix the geometry: the eigensystem of
  ``M^{-1/2} Hrd^H Hrd M^{-1/2}`` with ``M = P_rk psi_rd + sigma_n2^2 I``, and
  the SVD of ``Rx^{-1/2} Hsr R_s``.  The precoder and equalizer are rotations
  from those factors around a pair of diagonal gain matrices whose entries
  follow a water-filling law with non-negativity clipping; modes clipped to
  zero are deactivated, always from the weakest end.

* The allocated powers ``P_rk`` follow in closed form when the second-hop
  error matrices are proportional to identity (white training).  Otherwise
  one of two surrogates is used: a high-power form that drops the
  ``sigma_n2^2`` term of ``M`` (hsa), or a spectral bound replacing
  ``psi_rd`` by its largest eigenvalue times the identity (spa), which upper
  bounds the true objective.  A threshold on
  ``(P_r/K) lambda_min(psi_rd) / sigma_n2^2`` picks between them.

* After the powers are fixed, each branch assembles the closed-form factors
  of the problem it actually solved: white/spectral branches whiten with
  ``((P_rk delta + sigma_n2^2) I)^{-1/2}``, the high-power branch with
  ``(P_rk psi_rd)^{-1/2}``.  Solving a branch consistently makes the
  transmit-power equality, the gain identity
  ``sigma_n2^2 Tr(G G^H) = gamma P_rk`` and the branch-system stationarity
  equations close to rounding accuracy with one genuinely shared ``gamma``
  on every variant; the only approximation left is the distance between the
  branch system and the exact one, which is reported rather than designed
  away (and vanishes on the white-error path).

The estimated-CSI-only baseline (`naive`) runs the identical pipeline with
the error matrices dropped from the design equations; the relay receive
covariance stays exact because it is a measurable input statistic and the
transmit power budget is physical.  Evaluation of any solution always uses
the true moments supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .msemodel import LinkModel, effective_noise, signal_statistics
from .numerics import (
    SingularMatrixError,
    eigh_ordered,
    eigh_ordered_stack,
    hermitian_inv_sqrt,
    hermitian_inv_sqrt_stack,
    hermitian_part,
    spectrum_rank,
    svd_ordered,
    svd_ordered_stack,
)

__all__ = [
    "InfeasibleDesignError",
    "SubcarrierDecomposition",
    "AllocationResult",
    "TransceiverSolution",
    "KktReport",
    "decompose_subcarrier",
    "spectral_factors",
    "allocate_uncorrelated",
    "allocate_hsa",
    "allocate_spa",
    "solve",
    "kkt_residuals",
    "VARIANTS",
]

VARIANTS = ("robust", "uncorrelated", "hsa", "spa", "switched", "naive")

_PROPORTIONALITY_RTOL = 1e-8


class InfeasibleDesignError(RuntimeError):
    """No subcarrier can carry signal under the requested design."""


@dataclass(frozen=True)
class SubcarrierDecomposition:
    """Eigenstructure of one subcarrier at a fixed allocated power.

    ``u_theta / lam_theta`` diagonalize ``M^{-1/2} Hrd^H Hrd M^{-1/2}``;
    ``u_t / lam_t / v_t`` are the SVD of ``Rx^{-1/2} Hsr R_s``.  ``p`` and
    ``q`` are the numeric ranks of the two spectra; at most ``min(p, q)``
    modes can be active.
    """

    m: np.ndarray
    m_inv_sqrt: np.ndarray
    u_theta: np.ndarray
    lam_theta: np.ndarray
    u_t: np.ndarray
    lam_t: np.ndarray
    v_t: np.ndarray
    p: int
    q: int

    @property
    def n_max(self) -> int:
        return min(self.p, self.q)


@dataclass(frozen=True)
class AllocationResult:
    """Power split across subcarriers with the shared multiplier."""

    p_r_k: np.ndarray
    gamma: float
    active: list
    eta: np.ndarray
    chi: np.ndarray | None = None


@dataclass
class TransceiverSolution:
    """Per-subcarrier precoders/equalizers with multipliers and diagnostics."""

    f: np.ndarray
    g: np.ndarray
    p_r: float
    p_r_k: np.ndarray
    gamma: float
    gamma_k: np.ndarray
    eta_k: np.ndarray
    active_modes: np.ndarray
    variant: str
    branch: str
    threshold: float
    switch_criteria: np.ndarray | None = None
    decompositions: list = field(default_factory=list)
    lam_f: list = field(default_factory=list)
    lam_g: list = field(default_factory=list)
    lam_design: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.f.shape[0]


def decompose_subcarrier(
    h_rd_hat_k: np.ndarray,
    h_sr_hat_k: np.ndarray,
    r_s_k: np.ndarray,
    r_x_k: np.ndarray,
    psi_rd_k: np.ndarray,
    p_r_k: float,
    sigma_n2_sq: float,
) -> SubcarrierDecomposition:
    """Factor one subcarrier for a given allocated power."""
    n_r = h_rd_hat_k.shape[1]
    m = hermitian_part(p_r_k * psi_rd_k + sigma_n2_sq * np.eye(n_r))
    m_inv_sqrt = hermitian_inv_sqrt(m)
    theta = hermitian_part(
        m_inv_sqrt @ h_rd_hat_k.conj().T @ h_rd_hat_k @ m_inv_sqrt
    )
    theta_dec = eigh_ordered(theta)
    lam_theta = np.clip(theta_dec.eigenvalues, 0.0, None)
    rx_inv_sqrt = hermitian_inv_sqrt(r_x_k)
    t_dec = svd_ordered(rx_inv_sqrt @ h_sr_hat_k @ r_s_k)
    return SubcarrierDecomposition(
        m=m,
        m_inv_sqrt=m_inv_sqrt,
        u_theta=theta_dec.u,
        lam_theta=lam_theta,
        u_t=t_dec.u,
        lam_t=t_dec.singular_values,
        v_t=t_dec.v,
        p=spectrum_rank(t_dec.singular_values),
        q=spectrum_rank(lam_theta),
    )


def spectral_factors(
    lam_t: np.ndarray,
    lam_theta: np.ndarray,
    eta_k: float,
    gamma_k: float,
    sigma_n2_sq: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal water-filling gains for precoder and equalizer.

    Entries clipped by the non-negativity operation come out as exact zeros
    and the clipped sets of the two factors coincide by construction.
    """
    if gamma_k <= 0.0:
        raise InfeasibleDesignError(f"non-positive power multiplier gamma={gamma_k}")
    lam_t = np.asarray(lam_t, dtype=float)
    lam_theta = np.asarray(lam_theta, dtype=float)
    scale = np.sqrt(sigma_n2_sq * eta_k / gamma_k)
    lam_f_sq = scale * lam_t / np.sqrt(lam_theta) - eta_k / lam_theta
    active = lam_f_sq > 0.0
    lam_f = np.sqrt(np.where(active, lam_f_sq, 0.0))
    # Same clipped set: lam_g is a positive multiple of lam_f entrywise.
    lam_g = lam_f / (scale * np.sqrt(lam_theta))
    return lam_f, lam_g


def _prefix_sums(lam_t, lam_h, n):
    t = float(np.sum(lam_t[:n] / np.sqrt(lam_h[:n])))
    h = float(np.sum(1.0 / lam_h[:n]))
    return t, h


def allocate_uncorrelated(
    lam_t_per_k: list,
    lam_h_per_k: list,
    delta_per_k: np.ndarray,
    p_r: float,
    sigma_n2_sq: float,
) -> AllocationResult:
    """Closed-form power split when every ``psi_rd_k`` equals ``delta_k * I``.

    ``lam_h_per_k`` holds the (non-increasing, rank-trimmed) eigenvalues of
    ``Hrd_k^H Hrd_k``.  Subcarriers whose closed-form power goes non-positive
    are shut off entirely and the split is recomputed; clipped eigenmodes are
    dropped weakest-first the same way.
    """
    k = len(lam_t_per_k)
    delta = np.asarray(delta_per_k, dtype=float)
    n = [min(len(lam_t_per_k[i]), len(lam_h_per_k[i])) for i in range(k)]
    sigma2 = float(sigma_n2_sq)
    p_r_k = np.zeros(k)
    gamma = 0.0
    # One mode is retired per pass (the worst violator); a subcarrier only
    # dies when its last mode goes.  Gentler than batch removal: dropping a
    # weak mode often rescues the closed-form power of its own subcarrier.
    for _ in range(sum(n) + 1):
        idx = [i for i in range(k) if n[i] > 0]
        if not idx:
            raise InfeasibleDesignError("all subcarriers deactivated during allocation")
        a = np.zeros(k)
        c = np.zeros(k)
        for i in idx:
            t_i, h_i = _prefix_sums(lam_t_per_k[i], lam_h_per_k[i], n[i])
            a[i] = t_i / (1.0 + delta[i] * h_i)
            c[i] = sigma2 * h_i / (1.0 + delta[i] * h_i)
        s_a = float(a.sum())
        if s_a <= 0.0:
            raise InfeasibleDesignError("no subcarrier carries usable signal energy")
        root = (p_r + float(c.sum())) / s_a  # sqrt(sigma2 / gamma)
        gamma = sigma2 / root**2
        p_r_k = np.where(a > 0.0, root * a - c, 0.0)
        worst_i = -1
        worst_gap = 0.0
        for i in idx:
            if p_r_k[i] <= 0.0:
                gap = float("inf") if c[i] <= 0 else (c[i] - root * a[i]) / c[i]
                p_r_k[i] = 0.0
            else:
                eta_i = p_r_k[i] * delta[i] + sigma2
                j = n[i] - 1
                # Weakest active mode survives iff sqrt(sigma2*eta/gamma) *
                # lam_t * sqrt(lam_theta) > eta with lam_theta = lam_h / eta.
                lhs = root * np.sqrt(eta_i) * lam_t_per_k[i][j] * np.sqrt(lam_h_per_k[i][j])
                rhs = eta_i * np.sqrt(eta_i)
                gap = (rhs - lhs) / rhs
            if gap > worst_gap:
                worst_gap = gap
                worst_i = i
        if worst_i < 0:
            break
        n[worst_i] -= 1
        if n[worst_i] == 0:
            p_r_k[worst_i] = 0.0
    else:  # pragma: no cover - loop bound is a hard invariant
        raise RuntimeError("allocation failed to reach a fixed point")
    eta = np.where(p_r_k > 0.0, p_r_k * delta + sigma2, sigma2)
    return AllocationResult(p_r_k=p_r_k, gamma=gamma, active=list(n), eta=eta)


def allocate_hsa(
    lam_t_per_k: list,
    lam_gamma_per_k: list,
    weight_per_k: list,
    p_r: float,
    sigma_n2_sq: float,
) -> AllocationResult:
    """Power split under the high-power surrogate ``M ~ P_rk psi_rd``.

    ``lam_gamma_per_k`` are the eigenvalues of
    ``psi_rd^{-1/2} Hrd^H Hrd psi_rd^{-1/2}`` and ``weight_per_k`` the
    diagonals of ``U^H psi_rd^{-1} U`` in that eigenbasis.  Each subcarrier
    receives power proportional to the square root of its surrogate quality
    factor ``chi_k``; the shared multiplier is then ``chi_k / P_rk^2``.
    """
    k = len(lam_t_per_k)
    sigma2 = float(sigma_n2_sq)
    n = [min(len(lam_t_per_k[i]), len(lam_gamma_per_k[i])) for i in range(k)]
    p_r_k = np.zeros(k)
    chi = np.zeros(k)
    eta = np.full(k, sigma2)
    gamma = 0.0
    # Same one-removal-per-pass discipline as the white-error allocation.
    for _ in range(sum(n) + 1):
        idx = [i for i in range(k) if n[i] > 0]
        if not idx:
            raise InfeasibleDesignError("all subcarriers deactivated during allocation")
        chi = np.zeros(k)
        denom_eta = np.zeros(k)
        c3s = np.zeros(k)
        worst_i = -1
        worst_gap = 0.0
        for i in idx:
            lt = lam_t_per_k[i][: n[i]]
            lg = lam_gamma_per_k[i][: n[i]]
            w = weight_per_k[i][: n[i]]
            c1 = float(np.sum(w * lt / np.sqrt(lg)))
            c2 = float(np.sum(w / lg))
            c3 = float(np.sum(lt / np.sqrt(lg)))
            c4 = float(np.sum(1.0 / lg))
            denom = c1 + c1 * c4 - c2 * c3
            chi[i] = c3 * sigma2 * denom / (1.0 + c4) ** 2
            denom_eta[i] = denom
            c3s[i] = c3
            if denom <= 0.0 or chi[i] <= 0.0:
                worst_i, worst_gap = i, float("inf")
        if worst_i < 0:
            live = np.array(idx)
            s = float(np.sqrt(chi[live]).sum())
            gamma = (s / p_r) ** 2
            p_r_k = np.zeros(k)
            p_r_k[live] = p_r * np.sqrt(chi[live]) / s
            for i in idx:
                eta[i] = p_r_k[i] * c3s[i] / denom_eta[i]
                j = n[i] - 1
                lam_theta_j = lam_gamma_per_k[i][j] / p_r_k[i]
                lhs = (
                    np.sqrt(sigma2 * eta[i] / gamma)
                    * lam_t_per_k[i][j]
                    * np.sqrt(lam_theta_j)
                )
                gap = (eta[i] - lhs) / eta[i]
                if gap > worst_gap:
                    worst_gap = gap
                    worst_i = i
            if worst_i < 0:
                break
        n[worst_i] -= 1
        if n[worst_i] == 0:
            p_r_k[worst_i] = 0.0
    else:  # pragma: no cover - loop bound is a hard invariant
        raise RuntimeError("allocation failed to reach a fixed point")
    eta = np.where(p_r_k > 0.0, eta, sigma2)
    return AllocationResult(p_r_k=p_r_k, gamma=gamma, active=list(n), eta=eta, chi=chi)


def allocate_spa(
    lam_t_per_k: list,
    lam_h_per_k: list,
    lam_max_psi_per_k: np.ndarray,
    p_r: float,
    sigma_n2_sq: float,
) -> AllocationResult:
    """Spectral-bound power split: white-error formulas with
    ``delta_k = lambda_max(psi_rd_k)``."""
    return allocate_uncorrelated(
        lam_t_per_k, lam_h_per_k, lam_max_psi_per_k, p_r, sigma_n2_sq
    )


def _hsa_eta(lam_t, lam_gamma, weight, n, p_k):
    lt = lam_t[:n]
    lg = lam_gamma[:n]
    w = weight[:n]
    c1 = float(np.sum(w * lt / np.sqrt(lg)))
    c2 = float(np.sum(w / lg))
    c3 = float(np.sum(lt / np.sqrt(lg)))
    c4 = float(np.sum(1.0 / lg))
    denom = c1 + c1 * c4 - c2 * c3
    return p_k * c3 / denom if denom > 0.0 else -1.0


def _finalize_subcarrier(p_k, sigma2, n_start, lam_t, lam_s, gamma, eta_of_n):
    """Diagonal gains of one subcarrier at fixed power and shared gamma.

    ``lam_s`` is the branch's water-filling spectrum (the exact whitened
    spectrum on the white-error path, the surrogate spectrum otherwise) and
    ``eta_of_n`` maps an active-prefix size to the branch's noise-floor
    multiplier.  At the allocation's fixed point all entries are already
    positive; the shrink loop is a safeguard for boundary cases.
    """
    n = min(n_start, lam_t.size, lam_s.size)
    while n > 0:
        eta = float(eta_of_n(n))
        if eta <= 0.0:
            n -= 1
            continue
        lt = lam_t[:n]
        ls = lam_s[:n]
        root_ls = np.sqrt(ls)
        scale = np.sqrt(sigma2 * eta / gamma)
        lam_f_sq = scale * lt / root_ls - eta / ls
        if np.any(lam_f_sq <= 0.0):
            n -= 1
            continue
        lam_f = np.sqrt(lam_f_sq)
        lam_g = lam_f / (scale * root_ls)
        return n, eta, lam_f, lam_g
    return 0, sigma2, np.zeros(0), np.zeros(0)


def _is_scaled_identity(psi_k: np.ndarray, delta: float) -> bool:
    gap = np.abs(psi_k - delta * np.eye(psi_k.shape[0])).max()
    return gap <= _PROPORTIONALITY_RTOL * max(delta, 1e-300)


def solve(
    model: LinkModel,
    p_r: float,
    variant: str = "robust",
    threshold: float = 10.0,
) -> TransceiverSolution:
    """Design precoders and equalizers for every subcarrier.

    ``variant`` is one of ``robust`` (dispatch on the error structure),
    ``uncorrelated`` (requires white second-hop errors), ``hsa``, ``spa``,
    ``switched`` (threshold rule between hsa and spa) and ``naive``
    (estimated-CSI-only baseline).  Degenerate subcarriers with a vanishing
    hop get zero power and zero matrices and drop out of the coupling.
    """
    if p_r <= 0.0:
        raise ValueError("relay power budget must be positive")
    variant = variant.lower()
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    sigma2 = model.sigma_n2_sq
    if sigma2 <= 0.0:
        raise ValueError("second-hop noise variance must be positive")
    k = model.k

    design = model.estimated_csi_view() if variant == "naive" else model
    _, r_x = signal_statistics(design)
    rx_inv_sqrt = hermitian_inv_sqrt_stack(r_x)

    t_stack = rx_inv_sqrt @ design.h_sr_hat @ design.r_s
    u_t, s_t, v_t = svd_ordered_stack(t_stack)
    lam_t_per_k = [s_t[i][: spectrum_rank(s_t[i])] for i in range(k)]

    psi_w, psi_u = eigh_ordered_stack(design.psi_rd)
    psi_w = np.clip(psi_w, 0.0, None)
    deltas = psi_w[:, 0]
    switch_criteria = None

    if variant == "robust":
        if all(_is_scaled_identity(design.psi_rd[i], deltas[i]) for i in range(k)):
            branch = "uncorrelated"
        else:
            branch = "switched"
    else:
        branch = "uncorrelated" if variant == "naive" else variant

    if branch == "uncorrelated":
        for i in range(k):
            if not _is_scaled_identity(design.psi_rd[i], deltas[i]):
                raise ValueError(
                    "uncorrelated variant requires psi_rd proportional to identity "
                    f"(violated on subcarrier {i})"
                )
    if branch == "switched":
        switch_criteria = (p_r / k) * psi_w[:, -1] / sigma2
        hsa_votes = int(np.count_nonzero(switch_criteria >= threshold))
        branch = "hsa" if 2 * hsa_votes > k else "spa"

    h_rd_h = np.conj(np.swapaxes(design.h_rd_hat, -1, -2))
    gram_hh = h_rd_h @ design.h_rd_hat
    if branch in ("uncorrelated", "spa"):
        gram_w, gram_u = eigh_ordered_stack(gram_hh)
        gram_w = np.clip(gram_w, 0.0, None)
        lam_h_per_k = [gram_w[i][: spectrum_rank(gram_w[i])] for i in range(k)]
        allocation = allocate_uncorrelated(
            lam_t_per_k, lam_h_per_k, deltas, p_r, sigma2
        )
        basis_u = gram_u
    elif branch == "hsa":
        if np.any(psi_w[:, -1] <= _PROPORTIONALITY_RTOL * psi_w[:, 0]) or np.any(
            psi_w[:, 0] <= 0.0
        ):
            raise SingularMatrixError(
                "high-power branch requires positive definite psi_rd"
            )
        psi_inv_sqrt = (psi_u / psi_w[:, None, :] ** 0.5) @ np.conj(
            np.swapaxes(psi_u, -1, -2)
        )
        core = psi_inv_sqrt @ gram_hh @ psi_inv_sqrt
        core_w, core_u = eigh_ordered_stack(core)
        core_w = np.clip(core_w, 0.0, None)
        psi_inv = psi_inv_sqrt @ psi_inv_sqrt
        w_diag = np.einsum("kji,kjl,kli->ki", core_u.conj(), psi_inv, core_u).real
        lam_g_per_k, weight_per_k = [], []
        for i in range(k):
            rank = spectrum_rank(core_w[i])
            lam_g_per_k.append(core_w[i][:rank])
            weight_per_k.append(w_diag[i][:rank])
        allocation = allocate_hsa(lam_t_per_k, lam_g_per_k, weight_per_k, p_r, sigma2)
        basis_u = core_u
    else:  # pragma: no cover - exhaustively dispatched above
        raise AssertionError(branch)

    # Final factors: the branch solves its own (possibly surrogate) problem
    # consistently, so the whitener prefactor is the branch's M^{-1/2}:
    # ((P_k delta + sigma2) I)^{-1/2} on the white/spectral paths and
    # (P_k psi_rd)^{-1/2} on the high-power path.  Power equality, the gain
    # identity and the branch-system stationarity then all close exactly
    # with one shared gamma; only the gap between the branch system and the
    # exact one remains, and that is reported, not designed away.
    # The exact-M eigenstructure is recorded alongside for diagnostics.
    m_exact = allocation.p_r_k[:, None, None] * design.psi_rd + sigma2 * np.eye(
        model.n_r
    )
    m_exact_inv_sqrt = hermitian_inv_sqrt_stack(m_exact)
    theta_w, theta_u = eigh_ordered_stack(m_exact_inv_sqrt @ gram_hh @ m_exact_inv_sqrt)
    theta_w = np.clip(theta_w, 0.0, None)

    f = np.zeros((k, model.n_r, model.m_r), dtype=complex)
    g = np.zeros((k, model.n_s, model.m_d), dtype=complex)
    gamma = allocation.gamma
    gamma_k = np.full(k, gamma)
    eta_k = np.full(k, sigma2)
    active = np.zeros(k, dtype=int)
    decs = []
    lam_f_all = []
    lam_g_all = []
    lam_design = []
    for i in range(k):
        p_k = float(allocation.p_r_k[i])
        decs.append(
            SubcarrierDecomposition(
                m=m_exact[i],
                m_inv_sqrt=m_exact_inv_sqrt[i],
                u_theta=theta_u[i],
                lam_theta=theta_w[i],
                u_t=u_t[i],
                lam_t=s_t[i],
                v_t=v_t[i],
                p=len(lam_t_per_k[i]),
                q=spectrum_rank(theta_w[i]),
            )
        )
        if p_k <= 0.0 or allocation.active[i] == 0:
            lam_design.append(np.zeros(0))
            lam_f_all.append(np.zeros(0))
            lam_g_all.append(np.zeros(0))
            continue
        if branch == "hsa":
            lam_s = lam_g_per_k[i] / p_k
            prefactor = psi_inv_sqrt[i] / np.sqrt(p_k)
            eta_of_n = lambda n, i=i, p=p_k: _hsa_eta(
                lam_t_per_k[i], lam_g_per_k[i], weight_per_k[i], n, p
            )
        else:
            m_scale = p_k * float(deltas[i]) + sigma2
            lam_s = lam_h_per_k[i] / m_scale
            prefactor = np.eye(model.n_r) / np.sqrt(m_scale)
            eta_of_n = lambda n, s=m_scale: s
        lam_design.append(lam_s)
        n, eta, lam_f, lam_g = _finalize_subcarrier(
            p_k, sigma2, allocation.active[i], lam_t_per_k[i], lam_s, gamma, eta_of_n
        )
        lam_f_all.append(lam_f)
        lam_g_all.append(lam_g)
        if n == 0:
            continue
        active[i] = n
        eta_k[i] = eta
        u_s = basis_u[i][:, :n]
        f[i] = prefactor @ (u_s * lam_f) @ u_t[i][:, :n].conj().T @ rx_inv_sqrt[i]
        g[i] = (
            (v_t[i][:, :n] * lam_g)
            @ u_s.conj().T
            @ prefactor
            @ design.h_rd_hat[i].conj().T
        )

    return TransceiverSolution(
        f=f,
        g=g,
        p_r=float(p_r),
        p_r_k=allocation.p_r_k,
        gamma=allocation.gamma,
        gamma_k=gamma_k,
        eta_k=eta_k,
        active_modes=active,
        variant=variant,
        branch=branch,
        threshold=threshold,
        switch_criteria=switch_criteria,
        decompositions=decs,
        lam_f=lam_f_all,
        lam_g=lam_g_all,
        lam_design=lam_design,
    )


@dataclass(frozen=True)
class KktReport:
    """Maximum relative residuals of the optimality system of a solution.

    Stationarity is evaluated against the system the variant designed for,
    i.e. with the error matrix and noise-floor multiplier the branch used
    (the spectral bound for spa, no noise term in the whitener for hsa,
    zero error matrices for the baseline); on the white-error path that
    system coincides with the exact one.  ``exact_stationarity`` reports
    the equalizer-optimality gap against the true link with physical
    noise floors, which for the surrogates is approximation error rather
    than an implementation defect, so it is never asserted.
    """

    stationarity_g: float
    stationarity_f: float
    power_tightness: float
    gain_identity: float
    total_power: float
    gamma_spread: float
    power_feasibility: float
    exact_stationarity: float

    @property
    def max_asserted(self) -> float:
        return max(
            self.stationarity_g,
            self.stationarity_f,
            self.power_tightness,
            self.gain_identity,
            self.total_power,
            self.power_feasibility,
        )

    @property
    def feasible(self) -> bool:
        return self.power_tightness < 1e-6 and self.total_power < 1e-6


def _rel(err: float, scale: float) -> float:
    if scale <= 0.0:
        return 0.0 if err <= 0.0 else float("inf")
    return err / scale


def kkt_residuals(solution: TransceiverSolution, model: LinkModel) -> KktReport:
    """Evaluate a solution against the first-order optimality system.

    The error matrices entering the equations are the ones the variant
    designed with (zero for the naive baseline, true moments otherwise).
    """
    design = model.estimated_csi_view() if solution.variant == "naive" else model
    _, r_x = signal_statistics(design)
    sigma2 = design.sigma_n2_sq
    if solution.branch == "spa":
        psi_w, _ = eigh_ordered_stack(design.psi_rd)
        tops = np.clip(psi_w[:, 0], 0.0, None)
        psi_used = tops[:, None, None] * np.eye(design.n_r)
    else:
        psi_used = design.psi_rd
    res_g = res_f = res_pow = res_gain = res_feas = res_exact = 0.0
    for k in range(design.k):
        fk, gk = solution.f[k], solution.g[k]
        hrd, hsr, rs = design.h_rd_hat[k], design.h_sr_hat[k], design.r_s[k]
        psi = psi_used[k]
        p_k = float(solution.p_r_k[k])
        gam = float(solution.gamma)
        eta = float(solution.eta_k[k])

        core = hrd @ fk @ r_x[k] @ fk.conj().T @ hrd.conj().T
        rhs1 = rs @ (hrd @ fk @ hsr).conj().T
        lhs1 = gk @ (core + eta * np.eye(design.m_d))
        res_g = max(res_g, _rel(np.linalg.norm(lhs1 - rhs1), np.linalg.norm(rhs1)))
        eta_exact = effective_noise(fk, r_x[k], model.psi_rd[k], sigma2)
        lhs1x = gk @ (core + eta_exact * np.eye(design.m_d))
        res_exact = max(
            res_exact, _rel(np.linalg.norm(lhs1x - rhs1), np.linalg.norm(rhs1))
        )

        gg = gk.conj().T @ gk
        trace_gg = float(np.trace(gg).real)
        # Tr(GG^H) psi + gamma I written through the branch whitener: with
        # the gain identity those coincide except on the hsa path, whose
        # whitener absorbs the gamma term by dropping sigma2.
        m_branch = p_k * psi
        if solution.branch != "hsa":
            m_branch = m_branch + sigma2 * np.eye(design.n_r)
        lhs2 = hrd.conj().T @ gg @ hrd @ fk @ r_x[k] + (
            gam / sigma2
        ) * m_branch @ fk @ r_x[k]
        rhs2 = (hsr @ rs @ gk @ hrd).conj().T
        res_f = max(res_f, _rel(np.linalg.norm(lhs2 - rhs2), np.linalg.norm(rhs2)))

        power = float(np.trace(fk @ r_x[k] @ fk.conj().T).real)
        res_pow = max(res_pow, _rel(abs(power - p_k), max(p_k, power)))
        res_feas = max(res_feas, _rel(max(0.0, power - p_k), max(p_k, power)))
        gain = sigma2 * trace_gg
        res_gain = max(res_gain, _rel(abs(gain - gam * p_k), max(gam * p_k, gain)))

    res_total = abs(float(solution.p_r_k.sum()) - solution.p_r) / solution.p_r
    live = solution.active_modes > 0
    if solution.gamma > 0 and np.any(live):
        spread = float(np.abs(solution.gamma_k[live] - solution.gamma).max())
        res_gamma = spread / solution.gamma
    else:
        res_gamma = 0.0
    return KktReport(
        stationarity_g=res_g,
        stationarity_f=res_f,
        power_tightness=res_pow,
        gain_identity=res_gain,
        total_power=res_total,
        gamma_spread=res_gamma,
        power_feasibility=res_feas,
        exact_stationarity=res_exact,
    )
