"""Small robust-vs-baseline sweep over the second-hop SNR.

Runs paired Monte Carlo trials (both variants see the same channels,
estimates, data and noise), prints the MSE table and writes the metrics
CSV that the plotting front end consumes.
"""

import numpy as np

from afrelay.montecarlo import ExperimentConfig, series_to_csv, sweep

cfg = ExperimentConfig(
    k=16,
    l=5,
    alpha=0.0,
    sigma_e2=0.01,
    er_n2_db=tuple(np.arange(0.0, 31.0, 5.0)),
    trials=300,
    seed=5,
)

series = sweep(cfg, variants=["robust", "naive"])
robust, naive = series

print(f"{'Er/N2 dB':>9} {'robust':>10} {'naive':>10} {'gap':>10}")
for j, snr in enumerate(robust.values):
    gap = naive.mse_mean[j] - robust.mse_mean[j]
    print(f"{snr:>9.0f} {robust.mse_mean[j]:>10.5f} {naive.mse_mean[j]:>10.5f} "
          f"{gap:>10.5f}")

out = "demo_sweep.csv"
with open(out, "w", encoding="utf-8", newline="") as fh:
    fh.write(series_to_csv(series))
print(f"\nwrote {out}; render it with the plotting front end, e.g.")
print("  node frontend/dist/render.js mse-vs-snr demo_sweep.csv -o demo_sweep.svg")
