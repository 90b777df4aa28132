"""Preset experiments for the three result figures (reduced trial counts)."""

from __future__ import annotations

from .baselines import DesignId
from .config import SystemConfig
from .harness import ExperimentResult, run_experiment

PRESET_TRIALS = 200
# fields each preset pins regardless of config file or flags
PINNED_FIELDS = ("m_q", "design")

_ALL = (DesignId.PROPOSED_N_TAPS, DesignId.SOTA_FULL_TAPS, DesignId.SOTA_ZERO_TAPS)
_RATES = (DesignId.PROPOSED_N_TAPS, DesignId.SOTA_FULL_TAPS)


def fig2_configs(base: SystemConfig | None = None) -> list[SystemConfig]:
    """SI-budget success probability vs transmit power, M_q = 1, all designs."""
    base = base or SystemConfig(n_trials=PRESET_TRIALS)
    return [base.replace(m_q=1, design=_ALL)]


def fig3_configs(base: SystemConfig | None = None) -> list[SystemConfig]:
    """Downlink rates vs transmit power for M_q in {1, 4}."""
    base = base or SystemConfig(n_trials=PRESET_TRIALS)
    return [base.replace(m_q=m_q, design=_RATES) for m_q in (1, 4)]


# uplink and FD rates come from the same runs as the downlink rates
fig4_configs = fig3_configs

PRESETS = {"fig2": fig2_configs, "fig3": fig3_configs, "fig4": fig4_configs}


def run_preset(name: str, base: SystemConfig | None = None) -> ExperimentResult:
    return ExperimentResult.merge(run_experiment(cfg) for cfg in PRESETS[name](base))
