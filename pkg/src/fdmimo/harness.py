"""Monte Carlo trials, sweep aggregation and CSV output."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analog import (
    PlacementStrategy,
    TapErrorModel,
    build_canceller,
    enumerate_placements,
    place_taps,
)
from .baselines import DesignId, design2_canceller, nullspace_precoder, softnull_precoder
from .beamforming import PrecoderResult, rate_dl, rate_ul, rx_combiner, tx_precoding_alg1
from .channels import dbm_to_mw, gen_rayleigh, gen_ricean, mw_to_dbm
from .config import SystemConfig

log = logging.getLogger(__name__)

CSV_HEADER = (
    "design", "P_k_dbm", "P_m_dbm", "M_q", "N_taps", "n_trials",
    "prob_si_met", "mean_r_dl", "mean_r_ul", "mean_r_fd", "mean_alpha",
)
MAX_ERROR_FRACTION = 0.01
_DESIGN_ORDER = {d: i for i, d in enumerate(DesignId)}


class TrialError(RuntimeError):
    def __init__(self, trial_index, cause):
        super().__init__(f"trial {trial_index} failed: {cause}")
        self.trial_index = trial_index
        self.cause = cause


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrialMetrics:
    r_dl: float
    r_ul: float
    r_fd: float
    residual_si_max_dbm: float
    si_constraint_met: bool
    alpha_used: int
    feasible: bool


@dataclass
class PointResult:
    design: DesignId
    p_k_dbm: float
    p_m_dbm: float
    m_q: int
    n_taps: int
    trials: list[TrialMetrics] = field(default_factory=list)
    errors: list[TrialError] = field(default_factory=list)

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    def _col(self, name) -> np.ndarray:
        return np.array([getattr(t, name) for t in self.trials], dtype=float)

    @property
    def prob_si_met(self) -> float:
        return float(np.mean(self._col("si_constraint_met")))

    @property
    def mean_r_dl(self) -> float:
        return float(np.mean(self._col("r_dl")))

    @property
    def mean_r_ul(self) -> float:
        return float(np.mean(self._col("r_ul")))

    @property
    def mean_r_fd(self) -> float:
        return float(np.mean(self._col("r_fd")))

    @property
    def mean_alpha(self) -> float:
        return float(np.mean(self._col("alpha_used")))

    def stderr(self, name: str) -> float:
        x = self._col(name)
        return float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0

    def values(self, name: str) -> np.ndarray:
        return self._col(name)


@dataclass
class ExperimentResult:
    points: list[PointResult]
    config: SystemConfig | None = None
    configs: list[SystemConfig] = field(default_factory=list)

    def sorted_points(self) -> list[PointResult]:
        return sorted(
            self.points, key=lambda p: (_DESIGN_ORDER[p.design], p.m_q, p.p_k_dbm, p.p_m_dbm)
        )

    def select(self, design: DesignId, m_q: int | None = None) -> list[PointResult]:
        return [p for p in self.sorted_points() if p.design is design and (m_q is None or p.m_q == m_q)]

    @classmethod
    def merge(cls, results: Iterable["ExperimentResult"]) -> "ExperimentResult":
        results = list(results)
        return cls(
            [p for r in results for p in r.points],
            results[0].config if results else None,
            [c for r in results for c in (r.configs or [r.config]) if c is not None],
        )


def _draw_channels(cfg: SystemConfig, rng: np.random.Generator):
    H_qk = gen_rayleigh(cfg.m_q, cfg.n_k, cfg.pl_dl_db, rng)
    h_km = gen_rayleigh(cfg.m_k, 1, cfg.pl_ul_db, rng)
    H_kk = gen_ricean(cfg.m_k, cfg.n_k, cfg.pl_si_db, cfg.ricean_k_db, rng)
    return H_qk, h_km, H_kk


def _proposed_exhaustive(cfg, H_kk, H_qk, P_k, rng):
    """Best (feasible, max downlink rate) canceller over every tap placement.

    Taps of every candidate see the same per-slot quantization errors.
    """
    qseed = int(rng.integers(2**63))
    best = None
    for placement in enumerate_placements(cfg.n_k, cfg.m_k, cfg.n_taps, cfg.enumeration_cap):
        canc = build_canceller(H_kk, placement, cfg.tap_spec, np.random.default_rng(qseed))
        pre = tx_precoding_alg1(
            H_kk, H_qk, canc.C, P_k, cfg.lambda_a, cfg.alpha_max, cfg.precoder_mode, cfg.sigma_q2
        )
        score = (pre.feasible, rate_dl(pre.V, H_qk, cfg.sigma_q2) if pre.feasible else -pre.residual_si_per_chain_mw.max())
        if best is None or score > best[0]:
            best = (score, canc, pre)
    return best[1], best[2]


def precode(cfg: SystemConfig, design: DesignId, H_kk, H_qk, P_k: float, rng) -> tuple[np.ndarray, PrecoderResult]:
    """Canceller and TX precoder of one design; returns ``(H_res, precoder)``."""
    design = DesignId(design)
    tap_rng = rng if cfg.tap_error is not TapErrorModel.NONE else None
    if design is DesignId.PROPOSED_N_TAPS:
        if cfg.placement_strategy is PlacementStrategy.EXHAUSTIVE:
            canc, pre = _proposed_exhaustive(cfg, H_kk, H_qk, P_k, rng)
        else:
            placement = place_taps(H_kk, cfg.n_taps, cfg.placement_strategy)
            canc = build_canceller(H_kk, placement, cfg.tap_spec, tap_rng)
            pre = tx_precoding_alg1(
                H_kk, H_qk, canc.C, P_k, cfg.lambda_a, cfg.alpha_max, cfg.precoder_mode, cfg.sigma_q2
            )
        return H_kk + canc.C, pre
    if design is DesignId.SOTA_FULL_TAPS:
        canc = design2_canceller(H_kk, cfg.tap_spec, tap_rng)
        H_res = H_kk + canc.C
        pre = nullspace_precoder(
            H_kk, H_qk, P_k, cfg.precoder_mode,
            alpha_ns=cfg.alpha_ns, H_res=H_res, lambda_A=cfg.lambda_a, sigma_q2=cfg.sigma_q2,
        )
        return H_res, pre
    pre = softnull_precoder(
        H_kk, H_qk, P_k, cfg.alpha_max, mode=cfg.precoder_mode, lambda_A=cfg.lambda_a, sigma_q2=cfg.sigma_q2
    )
    return H_kk, pre


def run_trial(
    config: SystemConfig,
    rng: np.random.Generator,
    *,
    design: DesignId | None = None,
    p_k_dbm: float | None = None,
    p_m_dbm: float | None = None,
) -> TrialMetrics:
    """One channel realization: draw, design, combine, evaluate.

    Channels are drawn first (H_qk, h_km, H_kk) so designs sharing an rng
    seed see identical channels; tap errors are drawn afterwards.
    """
    if design is None:
        design = config.design[0]
    if p_k_dbm is None or p_m_dbm is None:
        points = config.sweep_points()
        if len(points) != 1:
            raise ValueError("run_trial needs explicit powers when the config sweeps")
        p_k_dbm = points[0][0] if p_k_dbm is None else p_k_dbm
        p_m_dbm = points[0][1] if p_m_dbm is None else p_m_dbm
    P_k, P_m = dbm_to_mw(p_k_dbm), dbm_to_mw(p_m_dbm)

    H_qk, h_km, H_kk = _draw_channels(config, rng)
    H_res, pre = precode(config, design, H_kk, H_qk, P_k, rng)
    comb = rx_combiner(H_res, pre.V, h_km, P_m, config.sigma_k2)
    r_dl = rate_dl(pre.V, H_qk, config.sigma_q2)
    r_ul = rate_ul(comb.sinr)
    worst = float(np.max(pre.residual_si_per_chain_mw))
    return TrialMetrics(
        r_dl=r_dl,
        r_ul=r_ul,
        r_fd=r_dl + r_ul,
        residual_si_max_dbm=mw_to_dbm(worst) if worst > 0 else -math.inf,
        si_constraint_met=bool(worst <= config.lambda_a),
        alpha_used=pre.alpha,
        feasible=pre.feasible,
    )


def trial_rng(seed: int, sweep_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, sweep_index, trial_index])


def _trial_job(args):
    cfg, design, sweep_index, trial_index, p_k, p_m = args
    try:
        return run_trial(cfg, trial_rng(cfg.seed, sweep_index, trial_index), design=design, p_k_dbm=p_k, p_m_dbm=p_m)
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as e:
        return TrialError(trial_index, e)


def run_experiment(config: SystemConfig, designs: Sequence[DesignId] | None = None) -> ExperimentResult:
    """Sweep every design over the config's power points.

    Trial ``t`` at sweep point ``s`` uses the rng stream ``(seed, s, t)``
    whichever design or worker runs it, so results do not depend on
    ``config.jobs``.
    """
    designs = tuple(config.design if designs is None else designs)
    if not config.sweep_points():
        raise ValueError("power sweep is empty")
    points = []
    pool = ProcessPoolExecutor(config.jobs) if config.jobs > 1 else None
    try:
        for design in designs:
            for s, (p_k, p_m) in enumerate(config.sweep_points()):
                jobs = [(config, design, s, t, p_k, p_m) for t in range(config.n_trials)]
                if pool is None:
                    outcomes = map(_trial_job, jobs)
                else:
                    outcomes = pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * config.jobs)))
                point = PointResult(design, p_k, p_m, config.m_q, config.design_for(design).n_taps)
                for out in outcomes:
                    (point.errors if isinstance(out, TrialError) else point.trials).append(out)
                _check_errors(point, config.n_trials)
                log.info(
                    "%s M_q=%d P_k=%.1f dBm P_m=%.1f dBm: P(si)=%.3f R_DL=%.3f R_UL=%.3f",
                    design.value, config.m_q, p_k, p_m, point.prob_si_met, point.mean_r_dl, point.mean_r_ul,
                )
                points.append(point)
    finally:
        if pool is not None:
            pool.shutdown()
    return ExperimentResult(points, config, [config])


def _check_errors(point: PointResult, n_trials: int):
    for err in point.errors:
        log.warning("%s at P_k=%.1f dBm: %s", point.design.value, point.p_k_dbm, err)
    if len(point.errors) > MAX_ERROR_FRACTION * n_trials or not point.trials:
        raise ExperimentError(
            f"{len(point.errors)}/{n_trials} trials failed for {point.design.value} "
            f"at P_k={point.p_k_dbm} dBm; first: {point.errors[0]}"
        )


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def csv_rows(result: ExperimentResult) -> list[list[str]]:
    rows = []
    for p in result.sorted_points():
        rows.append([
            p.design.value, _fmt(p.p_k_dbm), _fmt(p.p_m_dbm), str(p.m_q), str(p.n_taps), str(p.n_trials),
            _fmt(p.prob_si_met), _fmt(p.mean_r_dl), _fmt(p.mean_r_ul), _fmt(p.mean_r_fd), _fmt(p.mean_alpha),
        ])
    return rows


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(csv_rows(result))
    return buf.getvalue()


def write_csv(result: ExperimentResult, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(to_csv(result), encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write CSV to {path}: {e.strerror or e}") from e
