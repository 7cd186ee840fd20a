"""Frequency-selective MIMO channel generation and time/frequency conversion.

A channel is a set of ``L`` time-domain taps, each an ``rx x tx`` matrix with
i.i.d. circular complex Gaussian entries whose per-tap variance follows a
power-delay profile summing to one.  The per-subcarrier response on ``K``
carriers is ``H_k = sum_l taps[l] * exp(-2j*pi*k*l/K)``; with that convention
the stacked responses relate to the taps through the first ``L`` columns of
the unitary DFT matrix scaled by ``sqrt(K)``, and a block-circulant matrix
built from the taps acts on time-domain blocks exactly like the per-carrier
responses act in the frequency domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MultipathChannel",
    "TapFit",
    "exponential_profile",
    "standard_complex",
    "generate_channel",
    "subcarrier_phases",
    "to_frequency",
    "from_frequency",
    "block_circulant",
    "channel_to_csv",
    "channel_from_csv",
]


@dataclass(frozen=True)
class MultipathChannel:
    """Time-domain MIMO taps (L, rx, tx) plus their power-delay profile."""

    taps: np.ndarray
    tap_powers: np.ndarray

    @property
    def n_taps(self) -> int:
        return self.taps.shape[0]

    @property
    def rx(self) -> int:
        return self.taps.shape[1]

    @property
    def tx(self) -> int:
        return self.taps.shape[2]


@dataclass(frozen=True)
class TapFit:
    """Least-squares tap fit of per-subcarrier responses.

    ``residual`` is the relative reconstruction error; ``exact`` is False when
    the responses were not representable with the requested number of taps and
    the fit is therefore a projection.
    """

    channel: MultipathChannel
    residual: float
    exact: bool


def exponential_profile(n_taps: int, decay: float = 1.0) -> np.ndarray:
    """Normalized power-delay profile p_l proportional to exp(-decay*l)."""
    if n_taps < 1:
        raise ValueError("need at least one tap")
    p = np.exp(-decay * np.arange(n_taps, dtype=float))
    return p / p.sum()


def standard_complex(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular complex Gaussian samples with unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channel(
    rx: int,
    tx: int,
    n_taps: int,
    profile: np.ndarray,
    rng: np.random.Generator,
) -> MultipathChannel:
    """Draw a multipath channel with per-tap entry variance ``profile[l]``."""
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (n_taps,):
        raise ValueError(f"profile must have {n_taps} entries, got {profile.shape}")
    if abs(profile.sum() - 1.0) > 1e-9:
        raise ValueError("tap powers must sum to 1")
    taps = standard_complex(rng, (n_taps, rx, tx)) * np.sqrt(profile)[:, None, None]
    return MultipathChannel(taps=taps, tap_powers=profile)


def subcarrier_phases(k: int, n_taps: int) -> np.ndarray:
    """(K, L) matrix of exp(-2j*pi*k*l/K) factors."""
    grid = np.outer(np.arange(k), np.arange(n_taps))
    return np.exp(-2j * np.pi * grid / k)


def to_frequency(channel: MultipathChannel, k: int) -> np.ndarray:
    """Per-subcarrier responses (K, rx, tx) of a multipath channel."""
    if k < channel.n_taps:
        raise ValueError(
            f"need at least as many subcarriers as taps (K={k} < L={channel.n_taps})"
        )
    phases = subcarrier_phases(k, channel.n_taps)
    return np.einsum("kl,lij->kij", phases, channel.taps)


def from_frequency(responses: np.ndarray, n_taps: int) -> TapFit:
    """Least-squares taps for given per-subcarrier responses.

    The tap atoms are orthogonal across delays, so the projection is the
    plain inverse-DFT truncated to ``n_taps`` delays.  When the responses are
    exactly representable (which is always the case for the output of
    :func:`to_frequency` with ``K >= L``) the fit is exact.
    """
    responses = np.asarray(responses, dtype=complex)
    k = responses.shape[0]
    phases = subcarrier_phases(k, n_taps)
    taps = np.einsum("kl,kij->lij", phases.conj(), responses) / k
    rebuilt = np.einsum("kl,lij->kij", phases, taps)
    scale = float(np.linalg.norm(responses))
    residual = float(np.linalg.norm(rebuilt - responses)) / max(scale, 1e-300)
    power = np.linalg.norm(taps.reshape(n_taps, -1), axis=1) ** 2
    total = float(power.sum())
    tap_powers = power / total if total > 0 else np.full(n_taps, 1.0 / n_taps)
    channel = MultipathChannel(taps=taps, tap_powers=tap_powers)
    return TapFit(channel=channel, residual=residual, exact=residual < 1e-8)


def block_circulant(channel: MultipathChannel, k: int) -> np.ndarray:
    """(K*rx, K*tx) block-circulant matrix acting on stacked time blocks."""
    rx, tx = channel.rx, channel.tx
    out = np.zeros((k * rx, k * tx), dtype=complex)
    for i in range(k):
        for l in range(channel.n_taps):
            j = (i - l) % k
            out[i * rx : (i + 1) * rx, j * tx : (j + 1) * tx] = channel.taps[l]
    return out


def channel_to_csv(channel: MultipathChannel) -> str:
    """Serialize taps as text: per row ``tap,row,re0,im0,re1,im1,...``."""
    lines = [f"# afrelay-channel v1 taps={channel.n_taps} rx={channel.rx} tx={channel.tx}"]
    lines.append("powers," + ",".join(repr(float(p)) for p in channel.tap_powers))
    for l in range(channel.n_taps):
        for r in range(channel.rx):
            cells = []
            for c in range(channel.tx):
                z = channel.taps[l, r, c]
                cells.append(repr(float(z.real)))
                cells.append(repr(float(z.imag)))
            lines.append(f"{l},{r}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def channel_from_csv(text: str) -> MultipathChannel:
    """Inverse of :func:`channel_to_csv`."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0]
    if not header.startswith("# afrelay-channel v1"):
        raise ValueError("unrecognized channel serialization header")
    fields = dict(tok.split("=") for tok in header.split()[3:])
    n_taps, rx, tx = int(fields["taps"]), int(fields["rx"]), int(fields["tx"])
    powers = np.array([float(x) for x in lines[1].split(",")[1:]])
    taps = np.zeros((n_taps, rx, tx), dtype=complex)
    for ln in lines[2:]:
        cells = ln.split(",")
        l, r = int(cells[0]), int(cells[1])
        vals = [float(x) for x in cells[2:]]
        taps[l, r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return MultipathChannel(taps=taps, tap_powers=powers)
