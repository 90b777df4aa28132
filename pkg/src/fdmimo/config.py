"""Experiment configuration: a flat TOML key/value document.

Keys are the ``SystemConfig`` field names (case-insensitive, so ``N_k`` and
``n_k`` are the same key). Power sweeps are lists of dBm values.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analog import PlacementStrategy, TapErrorModel, TapHardwareSpec
from .baselines import Design, DesignId
from .beamforming import PrecoderMode
from .channels import dbm_to_mw

DEFAULT_SWEEP_DBM = tuple(float(p) for p in range(20, 41, 2))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    n_k: int = 4
    m_k: int = 4
    m_q: int = 1
    n_m: int = 1
    n_taps: int = 8
    p_k_dbm: tuple[float, ...] = DEFAULT_SWEEP_DBM
    # None sweeps P_m together with P_k; a list gives a P_k x P_m grid
    p_m_dbm: tuple[float, ...] | None = None
    sigma_q_dbm: float = -90.0
    sigma_k_dbm: float = -110.0
    lambda_a_dbm: float = -60.0
    pl_dl_db: float = 110.0
    pl_ul_db: float = 110.0
    pl_si_db: float = 40.0
    ricean_k_db: float = 35.0
    attenuation_step_db: float = 0.02
    phase_step_deg: float = 0.13
    tap_error: TapErrorModel = TapErrorModel.UNIFORM
    placement_strategy: PlacementStrategy = PlacementStrategy.FIRST_ROWS
    alpha_max: int = 2
    # projection dimension of the full-tap baseline; None = null-space rule
    alpha_ns: int | None = None
    precoder_mode: PrecoderMode = PrecoderMode.OPEN_LOOP
    design: tuple[DesignId, ...] = (DesignId.PROPOSED_N_TAPS,)
    n_trials: int = 1000
    seed: int = 0
    jobs: int = 1
    enumeration_cap: int = 100_000

    def __post_init__(self):
        # accept plain strings for enum fields when constructed directly
        for name in ("tap_error", "placement_strategy", "precoder_mode", "design", "p_k_dbm", "p_m_dbm"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, enum.Enum):
                try:
                    object.__setattr__(self, name, _coerce(name, value))
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"bad value for {name!r}: {value!r} ({e})") from None
        for name in ("n_k", "m_k", "m_q", "n_trials", "alpha_max", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_m != 1:
            raise ConfigError("node m has a single antenna (n_m = 1)")
        if not 0 <= self.n_taps <= self.m_k * self.n_k:
            raise ConfigError(f"n_taps must be in [0, {self.m_k * self.n_k}], got {self.n_taps}")
        if self.alpha_max > self.n_k:
            raise ConfigError(f"alpha_max must be <= n_k = {self.n_k}")
        if self.alpha_ns is not None and not 1 <= self.alpha_ns <= self.n_k:
            raise ConfigError(f"alpha_ns must be in [1, {self.n_k}]")
        powers = list(self.p_k_dbm) + list(self.p_m_dbm or ())
        scalars = [
            self.sigma_q_dbm, self.sigma_k_dbm, self.lambda_a_dbm,
            self.pl_dl_db, self.pl_ul_db, self.pl_si_db, self.ricean_k_db,
        ]
        if not all(math.isfinite(x) for x in powers + scalars):
            raise ConfigError("powers, noise floors, path losses and K-factor must be finite")
        if min(self.pl_dl_db, self.pl_ul_db, self.pl_si_db) < 0:
            raise ConfigError("path losses must be >= 0 dB")
        if not self.design:
            raise ConfigError("at least one design is required")
        self.tap_spec  # validates the step sizes

    # -- derived quantities (linear mW) --
    @property
    def sigma_q2(self) -> float:
        return dbm_to_mw(self.sigma_q_dbm)

    @property
    def sigma_k2(self) -> float:
        return dbm_to_mw(self.sigma_k_dbm)

    @property
    def lambda_a(self) -> float:
        return dbm_to_mw(self.lambda_a_dbm)

    @property
    def tap_spec(self) -> TapHardwareSpec:
        try:
            return TapHardwareSpec(self.attenuation_step_db, self.phase_step_deg, self.tap_error)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def design_for(self, design_id: DesignId) -> Design:
        alpha = self.alpha_ns if design_id is DesignId.SOTA_FULL_TAPS else self.alpha_max
        return Design.of(
            design_id, self.n_k, self.m_k, self.n_taps, placement=self.placement_strategy, alpha=alpha
        )

    def sweep_points(self) -> list[tuple[float, float]]:
        if self.p_m_dbm is None:
            return [(p, p) for p in self.p_k_dbm]
        return [(pk, pm) for pk in self.p_k_dbm for pm in self.p_m_dbm]

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = [x.value if hasattr(x, "value") else x for x in v]
            elif hasattr(v, "value"):
                v = v.value
            out[f.name] = v
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}


def _as_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str) and "," in value:
        return [v for v in (s.strip() for s in value.split(",")) if v]
    return [value]


def _coerce(name: str, value: Any) -> Any:
    if name in ("p_k_dbm", "p_m_dbm"):
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
            if name == "p_k_dbm":
                raise ConfigError("p_k_dbm cannot be empty")
            return None
        return tuple(float(v) for v in _as_list(value))
    if name == "design":
        return tuple(DesignId.parse(v) for v in _as_list(value))
    if name == "alpha_ns":
        if value is None or str(value).strip().lower() in ("", "none", "auto"):
            return None
        return int(value)
    if name == "tap_error":
        return TapErrorModel(str(value).strip().lower())
    if name == "placement_strategy":
        return PlacementStrategy(str(value).strip().lower())
    if name == "precoder_mode":
        return PrecoderMode(str(value).strip().lower())
    default = _FIELDS[name].default
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"expected an integer, got {value}")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def config_from_mapping(values: Mapping[str, Any], base: SystemConfig | None = None) -> SystemConfig:
    changes = {}
    for key, value in values.items():
        name = normalize_key(key)
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            changes[name] = _coerce(name, value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({e})") from None
    try:
        return dataclasses.replace(base or SystemConfig(), **changes)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


def load_config(path: str | Path, base: SystemConfig | None = None) -> SystemConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed config {path}: {e}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config {path} must be flat; found tables {nested}")
    return config_from_mapping(data, base)
