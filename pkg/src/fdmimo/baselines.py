"""Comparison designs and the design identifiers used by the harness.

``SOTA_FULL_TAPS`` pairs a one-tap-per-chain-pair canceller with a TX
precoder projected onto the (near-)null space of the raw SI channel; the two
are not co-designed. ``SOTA_ZERO_TAPS`` uses no analog cancellation and
relies on TX beamforming over the weakest SI directions (SoftNull style).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .analog import (
    CancellerRealization,
    PlacementStrategy,
    TapHardwareSpec,
    TapPlacement,
    build_canceller,
    tap_reduction_percent,
)
from .beamforming import (
    PrecoderMode,
    PrecoderResult,
    stream_precoder,
    residual_si_per_chain,
    right_singular_basis,
)


class DesignId(enum.Enum):
    PROPOSED_N_TAPS = "proposed"
    SOTA_FULL_TAPS = "sota_full"
    SOTA_ZERO_TAPS = "sota_zero"

    @classmethod
    def parse(cls, name: "str | DesignId") -> "DesignId":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "proposedntaps": cls.PROPOSED_N_TAPS,
            "proposed_n_taps": cls.PROPOSED_N_TAPS,
            "design1": cls.PROPOSED_N_TAPS,
            "sotafulltaps": cls.SOTA_FULL_TAPS,
            "sota_full_taps": cls.SOTA_FULL_TAPS,
            "design2": cls.SOTA_FULL_TAPS,
            "sotazerotaps": cls.SOTA_ZERO_TAPS,
            "sota_zero_taps": cls.SOTA_ZERO_TAPS,
            "softnull": cls.SOTA_ZERO_TAPS,
            "design3": cls.SOTA_ZERO_TAPS,
        }
        for d in cls:
            if key == d.value:
                return d
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown design {name!r}; choose from {[d.value for d in cls]}")


@dataclass(frozen=True)
class Design:
    """A design plus its tap budget for an ``n_rx x n_tx`` node."""

    id: DesignId
    n_taps: int
    n_tx: int
    n_rx: int
    placement: PlacementStrategy = PlacementStrategy.FIRST_ROWS
    alpha: int | None = None

    def __post_init__(self):
        full = self.n_rx * self.n_tx
        if self.id is DesignId.PROPOSED_N_TAPS and not 1 <= self.n_taps <= full:
            raise ValueError(f"proposed design needs 1 <= N <= {full}, got {self.n_taps}")
        if self.id is DesignId.SOTA_FULL_TAPS and self.n_taps != full:
            raise ValueError(f"full-tap design uses exactly {full} taps, got {self.n_taps}")
        if self.id is DesignId.SOTA_ZERO_TAPS and self.n_taps != 0:
            raise ValueError(f"zero-tap design uses no taps, got {self.n_taps}")

    @classmethod
    def of(cls, id: DesignId, n_tx: int, n_rx: int, n_taps: int | None = None, **kw) -> "Design":
        id = DesignId(id)
        if id is DesignId.SOTA_FULL_TAPS:
            n_taps = n_rx * n_tx
        elif id is DesignId.SOTA_ZERO_TAPS:
            n_taps = 0
        elif n_taps is None:
            raise ValueError("proposed design needs a tap count")
        return cls(id, n_taps, n_tx, n_rx, **kw)

    @property
    def tap_reduction_percent(self) -> float:
        return tap_reduction_percent(self.n_taps, self.n_tx, self.n_rx)


def nullspace_precoder(
    H_kk: np.ndarray,
    H_qk: np.ndarray,
    P_k: float,
    mode: PrecoderMode = PrecoderMode.OPEN_LOOP,
    *,
    alpha_ns: int | None = None,
    H_res: np.ndarray | None = None,
    lambda_A: float = math.inf,
    sigma_q2: float | None = None,
) -> PrecoderResult:
    """Precoder confined to the (near-)null space of the raw SI channel.

    With an exact null space its full dimension is used. A full-rank ``H_kk``
    has none, so the ``min(M_q, N_k)`` weakest right-singular directions
    stand in. ``alpha_ns`` overrides either choice. Residuals are evaluated
    on ``H_res`` (the channel after this design's own canceller), defaulting
    to ``H_kk``.
    """
    H_kk = np.asarray(H_kk)
    n_tx = H_kk.shape[1]
    if alpha_ns is None:
        rank = np.linalg.matrix_rank(H_kk)
        alpha_ns = n_tx - rank if rank < n_tx else min(H_qk.shape[0], n_tx)
    if not 1 <= alpha_ns <= n_tx:
        raise ValueError(f"alpha_ns must be in [1, {n_tx}], got {alpha_ns}")
    F = right_singular_basis(H_kk)[:, n_tx - alpha_ns :]
    G = stream_precoder(F, H_qk, P_k, mode, sigma_q2)
    V = F @ G
    res = residual_si_per_chain(H_kk if H_res is None else H_res, V)
    return PrecoderResult(V, alpha_ns, G.shape[1], res, bool(np.all(res <= lambda_A)))


def design2_canceller(
    H_kk: np.ndarray, tap_spec: TapHardwareSpec, rng: np.random.Generator | None = None
) -> CancellerRealization:
    """One tap per TX-RX chain pair, row-major, with the same tap hardware."""
    m, n = np.shape(H_kk)
    placement = TapPlacement(
        tuple((i, j) for i in range(1, m + 1) for j in range(1, n + 1)), PlacementStrategy.EXPLICIT, (m, n)
    )
    return build_canceller(np.asarray(H_kk), placement, tap_spec, rng)


def softnull_precoder(
    H_kk: np.ndarray,
    H_qk: np.ndarray,
    P_k: float,
    alpha: int,
    *,
    mode: PrecoderMode = PrecoderMode.OPEN_LOOP,
    lambda_A: float = math.inf,
    sigma_q2: float | None = None,
) -> PrecoderResult:
    """Transmit on the ``alpha`` weakest SI directions with no analog canceller."""
    H_kk = np.asarray(H_kk)
    n_tx = H_kk.shape[1]
    if not 1 <= alpha <= n_tx:
        raise ValueError(f"alpha must be in [1, {n_tx}], got {alpha}")
    F = right_singular_basis(H_kk)[:, n_tx - alpha :]
    G = stream_precoder(F, H_qk, P_k, mode, sigma_q2)
    V = F @ G
    res = residual_si_per_chain(H_kk, V)
    return PrecoderResult(V, alpha, G.shape[1], res, bool(np.all(res <= lambda_A)))
