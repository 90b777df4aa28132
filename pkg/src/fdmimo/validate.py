"""Randomized invariant checks behind the ``validate`` CLI subcommand."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analog import (
    PlacementStrategy,
    TapHardwareSpec,
    TapPlacement,
    build_canceller,
    place_taps,
)
from .baselines import DesignId, nullspace_precoder, softnull_precoder
from .beamforming import PrecoderMode, residual_si_per_chain, rx_combiner, tx_precoding_alg1
from .channels import dbm_to_mw, gen_rayleigh, gen_ricean, mw_to_dbm
from .config import SystemConfig
from .harness import run_trial, trial_rng


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


_HEURISTICS = (
    PlacementStrategy.LARGEST_AMPLITUDE,
    PlacementStrategy.ROW_WISE,
    PlacementStrategy.COLUMN_WISE,
    PlacementStrategy.FIRST_ROWS,
)


def _random_canceller(rng, quantized=True):
    m, n = rng.integers(1, 6, size=2)
    H = gen_ricean(m, n, 40.0, 35.0, rng)
    n_taps = int(rng.integers(1, m * n + 1))
    strategy = _HEURISTICS[rng.integers(len(_HEURISTICS))]
    spec = TapHardwareSpec() if quantized else TapHardwareSpec.ideal()
    return H, build_canceller(H, place_taps(H, n_taps, strategy), spec, rng)


def check_selection_and_diagonal(rng, n):
    for _ in range(n):
        _, canc = _random_canceller(rng)
        ok = (
            np.array_equal(canc.L1.sum(axis=1), np.ones(canc.n_taps))
            and np.array_equal(canc.L3.sum(axis=0), np.ones(canc.n_taps))
            and set(np.unique(canc.L1)) <= {0.0, 1.0}
            and set(np.unique(canc.L3)) <= {0.0, 1.0}
            and np.count_nonzero(canc.L2 - np.diag(np.diag(canc.L2))) == 0
        )
        if not ok:
            return False, f"placement {canc.placement.positions}"
    return True, f"{n} cancellers"


def check_scatter(rng, n):
    for _ in range(n):
        H, canc = _random_canceller(rng)
        scatter = np.zeros_like(H)
        scatter[canc.placement.rows, canc.placement.cols] = canc.taps
        if not np.array_equal(scatter, canc.C):
            return False, f"placement {canc.placement.positions}"
    return True, f"{n} cancellers"


def check_quantization_bound(rng, n):
    spec = TapHardwareSpec()
    bound = spec.worst_case_relative_error() + 1e-6
    worst = 0.0
    for _ in range(n):
        H = gen_ricean(4, 4, 40.0, 35.0, rng)
        full = TapPlacement(tuple((i, j) for i in range(1, 5) for j in range(1, 5)))
        canc = build_canceller(H, full, spec, rng)
        worst = max(worst, float(np.max(np.abs(H + canc.C) / np.abs(H))))
    return worst <= bound, f"worst {worst:.3e} vs bound {bound:.3e}"


def check_ideal_full_cancellation(rng, n):
    worst = 0.0
    for _ in range(n):
        H = gen_ricean(4, 4, 40.0, 35.0, rng)
        full = TapPlacement(tuple((i, j) for i in range(1, 5) for j in range(1, 5)))
        canc = build_canceller(H, full, TapHardwareSpec.ideal())
        worst = max(worst, np.linalg.norm(H + canc.C) / np.linalg.norm(H))
    return worst < 1e-12, f"max ratio {worst:.1e}"


def check_power_and_feasibility(rng, n):
    lam = dbm_to_mw(-60.0)
    for _ in range(n):
        m_q = int(rng.integers(1, 5))
        P = dbm_to_mw(rng.uniform(20, 40))
        H_kk, canc = _random_canceller(rng)
        m, nt = H_kk.shape
        H_qk = gen_rayleigh(m_q, nt, 110.0, rng)
        mode = PrecoderMode.OPEN_LOOP if rng.random() < 0.5 else PrecoderMode.CLOSED_LOOP
        results = [
            tx_precoding_alg1(H_kk, H_qk, canc.C, P, lam, int(rng.integers(1, nt + 1)), mode, 1e-9),
            nullspace_precoder(H_kk, H_qk, P, mode, sigma_q2=1e-9),
            softnull_precoder(H_kk, H_qk, P, int(rng.integers(1, nt + 1)), mode=mode, sigma_q2=1e-9),
        ]
        for pre in results:
            if pre.power_mw > P * (1 + 1e-9):
                return False, f"trace {pre.power_mw} > P {P}"
        alg1 = results[0]
        recheck = bool(np.all(residual_si_per_chain(H_kk + canc.C, alg1.V) <= lam))
        if recheck != alg1.feasible:
            return False, "feasible flag disagrees with recomputed residuals"
    return True, f"{n} instances"


def check_combiner_eigvec(rng, n):
    worst = 1.0
    for _ in range(n):
        H_res = gen_rayleigh(4, 4, 60.0, rng)
        V = gen_rayleigh(4, 2, 0.0, rng)
        h = gen_rayleigh(4, 1, 0.0, rng)
        comb = rx_combiner(H_res, V, h, 1.0, 1e-3)
        HV = H_res @ V
        A = np.linalg.inv(HV @ HV.conj().T + 1e-3 * np.eye(4)) @ h @ h.conj().T
        w, vecs = np.linalg.eig(A)
        e = vecs[:, np.argmax(np.abs(w))]
        worst = min(worst, abs(np.vdot(e / np.linalg.norm(e), comb.u.conj().ravel())))
    return abs(worst - 1) < 1e-8, f"min |<u, e_max>| = {worst:.12f}"


def check_dbm_round_trip(rng, n):
    x = rng.uniform(-200, 200, n)
    err = float(np.max(np.abs(mw_to_dbm(dbm_to_mw(x)) - x)))
    return err < 1e-12, f"max error {err:.1e}"


def check_determinism(rng, n):
    cfg = SystemConfig(p_k_dbm=(40.0,), design=tuple(DesignId))
    for t in range(min(n, 20)):
        for d in DesignId:
            a = run_trial(cfg, trial_rng(7, 0, t), design=d)
            b = run_trial(cfg, trial_rng(7, 0, t), design=d)
            if a != b:
                return False, f"trial {t} design {d.value}"
    return True, "repeat runs identical"


CHECKS: dict[str, Callable] = {
    "L1 rows / L3 columns sum to one, L2 diagonal": check_selection_and_diagonal,
    "L3 L2 L1 equals the tap scatter": check_scatter,
    "ideal full-tap canceller leaves no residual": check_ideal_full_cancellation,
    "quantized taps within the worst-case error": check_quantization_bound,
    "precoder power trace and feasibility flag": check_power_and_feasibility,
    "closed-form combiner is the dominant eigenvector": check_combiner_eigvec,
    "dBm/mW round trip": check_dbm_round_trip,
    "fixed seed gives identical trials": check_determinism,
}


def run_checks(n_instances: int = 200, seed: int = 0) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS.items():
        rng = np.random.default_rng([seed, len(out)])
        try:
            ok, detail = fn(rng, n_instances)
        except Exception as e:  # a crashing check is a failed check
            ok, detail = False, f"{type(e).__name__}: {e}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
