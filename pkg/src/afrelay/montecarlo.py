"""End-to-end trial engine: channels, estimates, design, QPSK transmission.

Each trial draws fresh true channels for both hops, samples channel
estimates consistent with the configured training design and noise level,
designs the relay precoders and destination equalizers from the estimates,
and then transmits QPSK data through the *true* channels, recording the
empirical squared error and hard-decision bit errors at the equalizer
output.  Every trial also records the analytic MSE of its design so
empirical and analytic figures can be compared at matched randomness.

Randomness comes from independent substreams keyed by
``(seed, trial_index)``, so serial and parallel execution produce
bit-identical results, and different design variants evaluated on the same
seed see the same channels, estimates, data and noise (paired comparisons).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import exponential_profile, generate_channel, standard_complex, to_frequency
from .estimation import ErrorMoments, error_moments, sample_estimate, white_error_moments
from .msemodel import LinkModel, link_model, total_mse
from .solver import InfeasibleDesignError, solve
from .training import build_gram

__all__ = [
    "ExperimentConfig",
    "PointSetup",
    "PointResult",
    "MetricSeries",
    "AXES",
    "qpsk_symbols",
    "qpsk_detect",
    "trial_rng",
    "prepare_point",
    "run_trial",
    "run_point",
    "sweep",
    "series_to_csv",
]

AXES = ("er_n2_db", "sigma_e2", "alpha")

CSV_HEADER = "axis,value,mse_mean,mse_stderr,ber_mean,ber_stderr,trials,variant"
CSV_VERSION = "# afrelay-metrics v1"


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment description; one of the axis fields may hold a sequence."""

    n_s: int = 2
    m_r: int = 2
    n_r: int = 2
    m_d: int = 2
    k: int = 16
    l: int = 5
    es_n1_db: float = 30.0
    er_n2_db: float | tuple = 20.0
    sigma_e2: float | tuple = 0.01
    alpha: float | tuple = 0.0
    trials: int = 500
    seed: int = 1
    variant: str = "robust"
    threshold: float = 10.0
    symbols: int = 1
    pdp_decay: float = 1.0

    def validate(self) -> None:
        if min(self.m_r, self.n_r, self.m_d) < self.n_s:
            raise ValueError(
                "antenna invariant violated: M_R, N_R, M_D must all be >= N_S"
            )
        if self.k < self.l:
            raise ValueError(f"subcarrier invariant violated: K={self.k} < L={self.l}")
        if self.trials < 1 or self.symbols < 1:
            raise ValueError("trials and symbols must be positive")
        for name in ("sigma_e2", "alpha"):
            vals = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if np.any(vals < 0.0):
                raise ValueError(f"{name} must be nonnegative")
        if np.any(np.atleast_1d(np.asarray(self.alpha, dtype=float)) >= 1.0):
            raise ValueError("alpha must be < 1")
        # White training (alpha=0) has closed-form moments at any K; an
        # actual correlated design additionally needs identifiability.
        needs_training = np.any(np.atleast_1d(np.asarray(self.sigma_e2, float)) > 0.0)
        correlated = np.any(np.atleast_1d(np.asarray(self.alpha, float)) > 0.0)
        tx_max = max(self.n_s, self.n_r)
        if needs_training and correlated and self.k < self.l * tx_max:
            raise ValueError(
                f"identifiability violated: K={self.k} < L*tx={self.l * tx_max}"
            )

    def axis(self) -> tuple[str, np.ndarray]:
        """The swept field and its values; scalars give a one-point axis."""
        swept = [name for name in AXES if np.ndim(getattr(self, name)) > 0]
        if len(swept) > 1:
            raise ValueError(f"only one axis may be swept, got {swept}")
        name = swept[0] if swept else "er_n2_db"
        return name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float))

    @property
    def sigma_n1_sq(self) -> float:
        # Tr(R_s) / (K * M_R * sigma_n1^2) equals the first-hop SNR.
        return self.n_s / (self.m_r * 10.0 ** (float(self.es_n1_db) / 10.0))

    @property
    def sigma_n2_sq(self) -> float:
        return 1.0

    def relay_power(self, er_n2_db: float) -> float:
        # P_r / (K * M_D * sigma_n2^2) equals the second-hop SNR.
        return 10.0 ** (er_n2_db / 10.0) * self.k * self.m_d * self.sigma_n2_sq


def _zero_moments(l: int, tx: int, k: int) -> ErrorMoments:
    dim = l * tx
    return ErrorMoments(
        phi=np.zeros((dim, dim), dtype=complex),
        psi=np.zeros((k, tx, tx), dtype=complex),
        sigma_e2=0.0,
    )


@dataclass(frozen=True)
class PointSetup:
    """One sweep point with its precomputed, trial-independent pieces."""

    config: ExperimentConfig
    moments_sr: ErrorMoments
    moments_rd: ErrorMoments
    profile: np.ndarray
    r_s: np.ndarray
    p_r: float


@dataclass
class PointResult:
    """Per-trial records of one (point, variant) run."""

    mse: np.ndarray
    bit_errors: np.ndarray
    analytic: np.ndarray
    nbits: int
    excluded: int


@dataclass
class MetricSeries:
    """Aggregated sweep results for one design variant."""

    axis: str
    values: np.ndarray
    mse_mean: np.ndarray
    mse_stderr: np.ndarray
    ber_mean: np.ndarray
    ber_stderr: np.ndarray
    trials: np.ndarray
    variant: str
    excluded: np.ndarray


def qpsk_symbols(rng: np.random.Generator, shape) -> tuple[np.ndarray, np.ndarray]:
    """Gray-mapped unit-energy QPSK symbols and the bits behind them."""
    bits = rng.integers(0, 2, size=tuple(shape) + (2,))
    symbols = ((1 - 2 * bits[..., 0]) + 1j * (1 - 2 * bits[..., 1])) / np.sqrt(2.0)
    return symbols, bits


def qpsk_detect(symbols: np.ndarray) -> np.ndarray:
    """Hard Gray decisions; inverse of :func:`qpsk_symbols` in the noiseless case."""
    bits = np.empty(symbols.shape + (2,), dtype=np.int64)
    bits[..., 0] = symbols.real < 0.0
    bits[..., 1] = symbols.imag < 0.0
    return bits


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent keyed substream for one trial, shared by all variants."""
    return np.random.default_rng(np.random.SeedSequence((seed, trial)))


def prepare_point(config: ExperimentConfig, **overrides) -> PointSetup:
    """Resolve a scalar sweep point and precompute its error moments."""
    if overrides:
        config = replace(config, **overrides)
    config.validate()
    for name in AXES:
        if np.ndim(getattr(config, name)) > 0:
            raise ValueError(f"point setup requires scalar {name}")
    alpha = float(config.alpha)
    sigma_e2 = float(config.sigma_e2)
    if sigma_e2 == 0.0:
        moments_sr = _zero_moments(config.l, config.n_s, config.k)
        moments_rd = _zero_moments(config.l, config.n_r, config.k)
    elif alpha == 0.0:
        moments_sr = white_error_moments(config.k, config.l, config.n_s, sigma_e2)
        moments_rd = white_error_moments(config.k, config.l, config.n_r, sigma_e2)
    else:
        moments_sr = error_moments(
            build_gram(config.k, config.l, config.n_s, alpha), sigma_e2
        )
        if config.n_r == config.n_s:
            moments_rd = moments_sr
        else:
            moments_rd = error_moments(
                build_gram(config.k, config.l, config.n_r, alpha), sigma_e2
            )
    return PointSetup(
        config=config,
        moments_sr=moments_sr,
        moments_rd=moments_rd,
        profile=exponential_profile(config.l, config.pdp_decay),
        r_s=np.eye(config.n_s, dtype=complex),
        p_r=config.relay_power(float(config.er_n2_db)),
    )


def run_trial(
    setup: PointSetup,
    rng: np.random.Generator,
    variant: str | None = None,
    zero_g: bool = False,
) -> tuple[float, int, int, float, bool]:
    """One end-to-end trial.

    Returns ``(mse, bit_errors, nbits, analytic_mse, ok)``; ``ok`` is False
    when the design was infeasible and the trial must be excluded.
    ``zero_g`` is a diagnostic hook that replaces the equalizers with zero.
    """
    cfg = setup.config
    variant = variant or cfg.variant
    ch_sr = generate_channel(cfg.m_r, cfg.n_s, cfg.l, setup.profile, rng)
    ch_rd = generate_channel(cfg.m_d, cfg.n_r, cfg.l, setup.profile, rng)
    est_sr = sample_estimate(ch_sr, setup.moments_sr, cfg.k, rng)
    est_rd = sample_estimate(ch_rd, setup.moments_rd, cfg.k, rng)
    model = link_model(est_sr, est_rd, setup.r_s, cfg.sigma_n1_sq, cfg.sigma_n2_sq)

    s, bits = qpsk_symbols(rng, (cfg.k, cfg.n_s, cfg.symbols))
    n1 = np.sqrt(cfg.sigma_n1_sq) * standard_complex(rng, (cfg.k, cfg.m_r, cfg.symbols))
    n2 = np.sqrt(cfg.sigma_n2_sq) * standard_complex(rng, (cfg.k, cfg.m_d, cfg.symbols))

    try:
        sol = solve(model, setup.p_r, variant=variant, threshold=cfg.threshold)
    except InfeasibleDesignError:
        return 0.0, 0, 0, 0.0, False

    h_sr = to_frequency(ch_sr, cfg.k)
    h_rd = to_frequency(ch_rd, cfg.k)
    g = np.zeros_like(sol.g) if zero_g else sol.g
    x = np.einsum("kij,kjs->kis", h_sr, s) + n1
    y = np.einsum("kij,kjl,kls->kis", h_rd, sol.f, x) + n2
    s_hat = np.einsum("kij,kjs->kis", g, y)
    err = s_hat - s
    mse = float((np.abs(err) ** 2).sum() / cfg.symbols)
    bit_errors = int(np.count_nonzero(qpsk_detect(s_hat) != bits))
    nbits = bits.size
    analytic = float(total_mse(sol, model)) if not zero_g else float("nan")
    return mse, bit_errors, nbits, analytic, True


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("AFRELAY_WORKERS", "")
    return max(1, int(env)) if env.isdigit() and int(env) > 0 else 1


def run_point(
    setup: PointSetup,
    variant: str | None = None,
    workers: int | None = None,
    zero_g: bool = False,
) -> PointResult:
    """All trials of one sweep point; deterministic for fixed (config, seed)."""
    cfg = setup.config
    trials = cfg.trials
    mse = np.zeros(trials)
    errs = np.zeros(trials, dtype=np.int64)
    analytic = np.zeros(trials)
    ok = np.zeros(trials, dtype=bool)
    nbits = cfg.k * cfg.n_s * cfg.symbols * 2

    def one(t: int) -> None:
        out = run_trial(setup, trial_rng(cfg.seed, t), variant=variant, zero_g=zero_g)
        mse[t], errs[t], _, analytic[t], ok[t] = out

    n_workers = _resolve_workers(workers)
    if n_workers == 1:
        for t in range(trials):
            one(t)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(one, range(trials)))

    keep = np.flatnonzero(ok)
    return PointResult(
        mse=mse[keep],
        bit_errors=errs[keep],
        analytic=analytic[keep],
        nbits=nbits,
        excluded=int(trials - keep.size),
    )


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = float(values.mean()) if n else float("nan")
    stderr = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan")
    return mean, stderr


def sweep(
    config: ExperimentConfig,
    variants: list | None = None,
    workers: int | None = None,
) -> list[MetricSeries]:
    """Run the configured axis for one or more variants.

    All variants share trial randomness, so differences between their series
    are paired comparisons.  MSE figures are totals over subcarriers
    normalized by K.
    """
    config.validate()
    axis, values = config.axis()
    variants = list(variants) if variants is not None else [config.variant]
    out = []
    for variant in variants:
        cols = {name: np.zeros(values.size) for name in
                ("mse_mean", "mse_stderr", "ber_mean", "ber_stderr")}
        trials = np.zeros(values.size, dtype=int)
        excluded = np.zeros(values.size, dtype=int)
        for j, val in enumerate(values):
            setup = prepare_point(config, **{axis: float(val)})
            res = run_point(setup, variant=variant, workers=workers)
            m, se = _mean_stderr(res.mse / config.k)
            cols["mse_mean"][j] = m
            cols["mse_stderr"][j] = se
            b, bse = _mean_stderr(res.bit_errors / res.nbits)
            cols["ber_mean"][j] = b
            cols["ber_stderr"][j] = bse
            trials[j] = res.mse.size
            excluded[j] = res.excluded
        out.append(
            MetricSeries(
                axis=axis,
                values=values.copy(),
                mse_mean=cols["mse_mean"],
                mse_stderr=cols["mse_stderr"],
                ber_mean=cols["ber_mean"],
                ber_stderr=cols["ber_stderr"],
                trials=trials,
                variant=variant,
                excluded=excluded,
            )
        )
    return out


def series_to_csv(series: list) -> str:
    """Render metric series in the stable, versioned CSV schema."""
    lines = [CSV_VERSION, CSV_HEADER]
    for s in series:
        for j in range(s.values.size):
            lines.append(
                ",".join(
                    [
                        s.axis,
                        repr(float(s.values[j])),
                        repr(float(s.mse_mean[j])),
                        repr(float(s.mse_stderr[j])),
                        repr(float(s.ber_mean[j])),
                        repr(float(s.ber_stderr[j])),
                        str(int(s.trials[j])),
                        s.variant,
                    ]
                )
            )
    return "\n".join(lines) + "\n"
