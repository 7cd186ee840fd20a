"""Robust MMSE relay transceiver design for dual-hop AF MIMO-OFDM links."""

from .channel import (
    MultipathChannel,
    exponential_profile,
    from_frequency,
    generate_channel,
    to_frequency,
)
from .estimation import (
    ChannelEstimate,
    ErrorMoments,
    error_moments,
    expected_sandwich,
    lmmse_estimate,
    moments_to_csv,
    sample_estimate,
    white_error_moments,
)
from .montecarlo import (
    ExperimentConfig,
    MetricSeries,
    prepare_point,
    run_point,
    run_trial,
    series_to_csv,
    sweep,
)
from .msemodel import LinkModel, link_model, per_subcarrier_mse, total_mse
from .numerics import dft_matrix, eigh_ordered, hermitian_inv_sqrt, kron, svd_ordered
from .solver import (
    InfeasibleDesignError,
    KktReport,
    TransceiverSolution,
    kkt_residuals,
    solve,
)
from .training import TrainingDesign, build_gram, materialize_sequence

__all__ = [
    "MultipathChannel",
    "exponential_profile",
    "generate_channel",
    "to_frequency",
    "from_frequency",
    "TrainingDesign",
    "build_gram",
    "materialize_sequence",
    "ErrorMoments",
    "ChannelEstimate",
    "error_moments",
    "white_error_moments",
    "moments_to_csv",
    "lmmse_estimate",
    "sample_estimate",
    "expected_sandwich",
    "LinkModel",
    "link_model",
    "per_subcarrier_mse",
    "total_mse",
    "TransceiverSolution",
    "KktReport",
    "InfeasibleDesignError",
    "solve",
    "kkt_residuals",
    "ExperimentConfig",
    "MetricSeries",
    "prepare_point",
    "run_point",
    "run_trial",
    "sweep",
    "series_to_csv",
    "dft_matrix",
    "svd_ordered",
    "eigh_ordered",
    "hermitian_inv_sqrt",
    "kron",
]

__version__ = "0.1.0"
