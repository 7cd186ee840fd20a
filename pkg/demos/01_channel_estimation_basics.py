"""Walk through channel generation, training and error statistics.

Generates a 5-tap 2x2 multipath channel, builds a spatially correlated
training design, estimates the taps from a noisy training observation and
compares the empirical estimation-error statistics against the closed-form
moments used everywhere else in the package.
"""

import numpy as np

from afrelay.channel import exponential_profile, generate_channel, to_frequency
from afrelay.estimation import error_moments, lmmse_estimate, simulate_training
from afrelay.training import build_gram, materialize_sequence

K = 64          # training block length == number of subcarriers
L = 5           # channel taps per hop
TX = RX = 2     # antennas
ALPHA = 0.4     # spatial correlation of the training sequence
SIGMA_E2 = 0.05 # noise variance during estimation
TRIALS = 2000

rng = np.random.default_rng(2024)

profile = exponential_profile(L)
print("power-delay profile:", np.round(profile, 4))

design = build_gram(K, L, TX, ALPHA)
d = materialize_sequence(design, rng)
gram = np.kron(np.eye(L), K * np.array([[1.0, ALPHA], [ALPHA, 1.0]]))
print("Gram reached its target:", np.allclose(design.gram, gram))

moments = error_moments(design, SIGMA_E2)
print("\nper-subcarrier error matrix psi_0 (same on every subcarrier):")
print(np.round(moments.psi[0].real, 6))

# Estimate one channel realisation and a Monte Carlo error covariance.
errors = []
for _ in range(TRIALS):
    truth = generate_channel(RX, TX, L, profile, rng)
    received = simulate_training(truth, d, SIGMA_E2, rng)
    taps_hat = lmmse_estimate(received, d, L, RX, SIGMA_E2)
    errors.append((truth.taps - taps_hat).ravel())
errors = np.array(errors)
emp_var = np.mean(np.abs(errors) ** 2)
# Tap-error variance averaged over entries equals tr(phi)/(L*TX).
ref_var = np.trace(moments.phi).real / (L * TX)
print(f"\nempirical tap-error variance {emp_var:.6f} vs closed form {ref_var:.6f}")

truth = generate_channel(RX, TX, L, profile, rng)
freq = to_frequency(truth, K)
print("\nfrequency response on subcarrier 0:")
print(np.round(freq[0], 3))
