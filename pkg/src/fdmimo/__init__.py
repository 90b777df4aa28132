"""Reduced-tap analog self-interference cancellation jointly designed with
TX/RX digital beamforming for a full-duplex MIMO node.

Matrices are plain 2-D ``numpy`` complex arrays; powers are linear mW
internally and dB/dBm only at configuration and reporting boundaries.
"""

from .channels import FadingKind, FadingSpec, dbm_to_mw, gen_rayleigh, gen_ricean, mw_to_dbm
from .analog import (
    CancellerRealization,
    EnumerationTooLarge,
    PlacementStrategy,
    TapErrorModel,
    TapHardwareSpec,
    TapPlacement,
    build_canceller,
    build_selection_matrices,
    compose,
    enumerate_placements,
    ideal_tap_values,
    place_taps,
    quantize_taps,
    residual_channel,
    tap_reduction_percent,
)
from .beamforming import (
    CombinerResult,
    PrecoderMode,
    PrecoderResult,
    openloop_precoder,
    rate_dl,
    rate_ul,
    residual_si_per_chain,
    right_singular_basis,
    rx_combiner,
    sinr,
    tx_precoding_alg1,
    waterfilling_precoder,
)
from .baselines import Design, DesignId, design2_canceller, nullspace_precoder, softnull_precoder
from .config import ConfigError, SystemConfig, load_config
from .harness import ExperimentResult, run_experiment, run_trial, to_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "FadingKind",
    "FadingSpec",
    "dbm_to_mw",
    "gen_rayleigh",
    "gen_ricean",
    "mw_to_dbm",
    "CancellerRealization",
    "EnumerationTooLarge",
    "PlacementStrategy",
    "TapErrorModel",
    "TapHardwareSpec",
    "TapPlacement",
    "build_canceller",
    "build_selection_matrices",
    "compose",
    "enumerate_placements",
    "ideal_tap_values",
    "place_taps",
    "quantize_taps",
    "residual_channel",
    "tap_reduction_percent",
    "CombinerResult",
    "PrecoderMode",
    "PrecoderResult",
    "openloop_precoder",
    "rate_dl",
    "rate_ul",
    "residual_si_per_chain",
    "right_singular_basis",
    "rx_combiner",
    "sinr",
    "tx_precoding_alg1",
    "waterfilling_precoder",
    "Design",
    "DesignId",
    "design2_canceller",
    "nullspace_precoder",
    "softnull_precoder",
    "ConfigError",
    "SystemConfig",
    "load_config",
    "ExperimentResult",
    "run_experiment",
    "run_trial",
    "to_csv",
    "write_csv",
]
