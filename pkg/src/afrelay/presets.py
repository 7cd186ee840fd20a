"""Desk-scale presets for the standard figure experiments.

All presets share the 2x2 antenna setting, 5-tap channels, a first-hop SNR
of 30 dB and a switching threshold of 10.  Defaults encode the full-scale
configuration with K = 64 subcarriers; pass ``k=16`` (or ``--K 16`` on the
command line) together with a trial count for desk-scale runs that finish
in a couple of minutes per figure.

Figure map (axis / parameters / variants):

* fig 2 - MSE vs second-hop SNR, white training (alpha = 0), one pair of
  robust/baseline curves per estimation noise in {0.002, 0.005, 0.01}.
* fig 3 - same as fig 2 with spatially correlated training (alpha = 0.4).
* fig 4 - MSE vs training correlation alpha at 25 dB, sigma_e2 = 0.01.
* fig 5 - BER vs second-hop SNR at alpha = 0.5 (log-scale plot downstream).
* fig 6 - MSE vs second-hop SNR comparing the high-power and spectral
  surrogates and the threshold switch, alpha = 0.4, sigma_e2 = 0.1 (chosen
  so the threshold rule actually transitions inside the swept range).
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .montecarlo import ExperimentConfig, MetricSeries, sweep

__all__ = ["FIGURES", "figure_config", "figure_series"]

_SNR_GRID = tuple(float(x) for x in np.arange(0.0, 31.0, 5.0))

FIGURES = {
    2: dict(kind="mse-vs-snr", alpha=0.0, sigma_e2_list=(0.002, 0.005, 0.01),
            variants=("robust", "naive"), trials=500, symbols=1),
    3: dict(kind="mse-vs-snr", alpha=0.4, sigma_e2_list=(0.002, 0.005, 0.01),
            variants=("robust", "naive"), trials=500, symbols=1),
    4: dict(kind="mse-vs-alpha", er_n2_db=25.0, sigma_e2=0.01,
            alpha_list=(0.0, 0.2, 0.4, 0.6), variants=("robust", "naive"),
            trials=500, symbols=1),
    5: dict(kind="ber-vs-snr", alpha=0.5, sigma_e2_list=(0.002, 0.005, 0.01),
            variants=("robust", "naive"), trials=1500, symbols=8),
    6: dict(kind="approx-compare", alpha=0.4, sigma_e2=0.1,
            variants=("hsa", "spa", "switched"), trials=500, symbols=1),
}


def figure_config(number: int, k: int = 64, trials: int | None = None,
                  seed: int = 1) -> ExperimentConfig:
    """Base configuration of one figure preset (axis fields still scalar)."""
    if number not in FIGURES:
        raise ValueError(f"no preset for figure {number}; available: {sorted(FIGURES)}")
    spec = FIGURES[number]
    return ExperimentConfig(
        k=k,
        l=5,
        trials=trials if trials is not None else spec["trials"],
        seed=seed,
        symbols=spec["symbols"],
        threshold=10.0,
    )


def figure_series(number: int, k: int = 64, trials: int | None = None,
                  seed: int = 1, workers: int | None = None) -> list[MetricSeries]:
    """Run one figure preset and return its labelled metric series."""
    spec = FIGURES[number]
    base = figure_config(number, k=k, trials=trials, seed=seed)
    out: list[MetricSeries] = []
    if spec["kind"] in ("mse-vs-snr", "ber-vs-snr"):
        for sigma_e2 in spec["sigma_e2_list"]:
            cfg = replace(base, alpha=spec["alpha"], sigma_e2=sigma_e2,
                          er_n2_db=_SNR_GRID)
            for series in sweep(cfg, variants=list(spec["variants"]), workers=workers):
                series.variant = f"{series.variant}@sigma_e2={sigma_e2}"
                out.append(series)
    elif spec["kind"] == "mse-vs-alpha":
        cfg = replace(base, er_n2_db=spec["er_n2_db"], sigma_e2=spec["sigma_e2"],
                      alpha=spec["alpha_list"])
        out.extend(sweep(cfg, variants=list(spec["variants"]), workers=workers))
    elif spec["kind"] == "approx-compare":
        cfg = replace(base, alpha=spec["alpha"], sigma_e2=spec["sigma_e2"],
                      er_n2_db=_SNR_GRID)
        out.extend(sweep(cfg, variants=list(spec["variants"]), workers=workers))
    else:  # pragma: no cover
        raise AssertionError(spec["kind"])
    return out
