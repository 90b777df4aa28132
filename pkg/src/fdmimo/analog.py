"""Baseband model of the reduced-tap analog canceller.

N taps sit between the N_k TX chains and the M_k RX chains. An N_k-to-1 MUX
feeds each tap and a 1-to-M_k DEMUX routes its output, so the canceller acts
on baseband signals as ``C = L3 @ L2 @ L1``. Here ``L1`` (N x N_k) and ``L3``
(M_k x N) are binary selection matrices and ``L2`` is the diagonal of complex
tap gains. The fixed tap delay is folded into the tap phase.

Tap positions use 1-based ``(rx, tx)`` pairs, i.e. entry ``[rx-1, tx-1]`` of
the M_k x N_k self-interference channel.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

DEFAULT_ENUMERATION_CAP = 100_000


class PlacementStrategy(enum.Enum):
    LARGEST_AMPLITUDE = "largest_amplitude"
    ROW_WISE = "row_wise"
    COLUMN_WISE = "column_wise"
    FIRST_ROWS = "first_rows"
    EXPLICIT = "explicit"
    EXHAUSTIVE = "exhaustive"


class TapErrorModel(enum.Enum):
    NONE = "none"
    UNIFORM = "uniform"


class EnumerationTooLarge(ValueError):
    """Raised when an exhaustive placement search exceeds the cap."""


@dataclass(frozen=True)
class TapPlacement:
    positions: tuple[tuple[int, int], ...]
    strategy: PlacementStrategy = PlacementStrategy.EXPLICIT
    shape: tuple[int, int] | None = None

    def __post_init__(self):
        pos = tuple((int(i), int(j)) for i, j in self.positions)
        object.__setattr__(self, "positions", pos)
        if len(set(pos)) != len(pos):
            raise ValueError(f"tap positions must be distinct: {pos}")
        if self.shape is not None:
            m, n = self.shape
            if len(pos) > m * n:
                raise ValueError(f"{len(pos)} taps do not fit a {m}x{n} canceller")
            for i, j in pos:
                if not (1 <= i <= m and 1 <= j <= n):
                    raise ValueError(f"tap position {(i, j)} outside {m}x{n}")

    def __len__(self):
        return len(self.positions)

    @property
    def rows(self) -> np.ndarray:
        return np.array([i - 1 for i, _ in self.positions], dtype=int)

    @property
    def cols(self) -> np.ndarray:
        return np.array([j - 1 for _, j in self.positions], dtype=int)


@dataclass(frozen=True)
class TapHardwareSpec:
    """Tap setting resolution. Errors are uniform on +-half a step."""

    attenuation_step_db: float = 0.02
    phase_step_deg: float = 0.13
    error_model: TapErrorModel = TapErrorModel.UNIFORM

    def __post_init__(self):
        if self.error_model is not TapErrorModel.NONE:
            if not (self.attenuation_step_db > 0 and self.phase_step_deg > 0):
                raise ValueError("tap steps must be positive when quantization errors are on")

    @classmethod
    def ideal(cls) -> "TapHardwareSpec":
        return cls(error_model=TapErrorModel.NONE)

    def worst_case_relative_error(self) -> float:
        """Largest ``|1 - a e^{j phi}|`` over the error box (attained at a corner)."""
        if self.error_model is TapErrorModel.NONE:
            return 0.0
        a = 10.0 ** (self.attenuation_step_db / 2 / 20.0)
        phi = math.radians(self.phase_step_deg / 2)
        return abs(1 - a * complex(math.cos(phi), math.sin(phi)))


@dataclass(frozen=True)
class CancellerRealization:
    L1: np.ndarray
    L2: np.ndarray
    L3: np.ndarray
    placement: TapPlacement
    C: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "C", compose(self.L1, self.L2, self.L3))

    @property
    def n_taps(self) -> int:
        return len(self.placement)

    @property
    def taps(self) -> np.ndarray:
        return np.diag(self.L2).copy()


def _check_capacity(H: np.ndarray, n_taps: int):
    m, n = H.shape
    if n_taps > m * n:
        raise ValueError(f"cannot place {n_taps} taps in a {m}x{n} canceller (capacity {m * n})")
    if n_taps < 0:
        raise ValueError(f"tap count must be nonnegative, got {n_taps}")


def _sorted_by_amplitude(values: np.ndarray, index: Sequence[int]) -> list[int]:
    # stable sort on -|x| keeps ties in index order
    order = np.argsort(-np.abs(values), kind="stable")
    return [index[k] for k in order]


def place_taps(H_kk: np.ndarray, n_taps: int, strategy: PlacementStrategy) -> TapPlacement:
    """Choose ``n_taps`` canceller positions on the SI channel ``H_kk``.

    LARGEST_AMPLITUDE takes the largest ``|H_kk|`` entries. ROW_WISE fills
    whole rows in order of decreasing row norm (entries by decreasing
    amplitude) and COLUMN_WISE does the same with columns. FIRST_ROWS fills
    rows 1, 2, ... in natural column order. Ties go to the smaller row, then
    the smaller column.
    """
    H_kk = np.asarray(H_kk)
    m, n = H_kk.shape
    _check_capacity(H_kk, n_taps)
    shape = (m, n)
    strategy = PlacementStrategy(strategy)

    if strategy is PlacementStrategy.LARGEST_AMPLITUDE:
        flat = _sorted_by_amplitude(H_kk.ravel(), range(m * n))[:n_taps]
        pos = [(k // n + 1, k % n + 1) for k in flat]
    elif strategy is PlacementStrategy.ROW_WISE:
        pos = []
        for i in _sorted_by_amplitude(np.linalg.norm(H_kk, axis=1), range(m)):
            pos += [(i + 1, j + 1) for j in _sorted_by_amplitude(H_kk[i], range(n))]
        pos = pos[:n_taps]
    elif strategy is PlacementStrategy.COLUMN_WISE:
        pos = []
        for j in _sorted_by_amplitude(np.linalg.norm(H_kk, axis=0), range(n)):
            pos += [(i + 1, j + 1) for i in _sorted_by_amplitude(H_kk[:, j], range(m))]
        pos = pos[:n_taps]
    elif strategy is PlacementStrategy.FIRST_ROWS:
        pos = [(k // n + 1, k % n + 1) for k in range(n_taps)]
    else:
        raise ValueError(
            f"{strategy.value} placement is not derived from H_kk alone; "
            "build a TapPlacement directly or search enumerate_placements()"
        )
    return TapPlacement(tuple(pos), strategy, shape)


def build_selection_matrices(placement: TapPlacement, n_tx: int, n_rx: int) -> tuple[np.ndarray, np.ndarray]:
    """MUX matrix ``L1`` (N x n_tx) and DEMUX matrix ``L3`` (n_rx x N)."""
    n = len(placement)
    TapPlacement(placement.positions, placement.strategy, (n_rx, n_tx))  # bounds check
    L1 = np.zeros((n, n_tx))
    L3 = np.zeros((n_rx, n))
    t = np.arange(n)
    L1[t, placement.cols] = 1.0
    L3[placement.rows, t] = 1.0
    return L1, L3


def ideal_tap_values(H_kk: np.ndarray, placement: TapPlacement) -> np.ndarray:
    """Diagonal ``L2`` holding the negated SI entries at the tap positions."""
    H_kk = np.asarray(H_kk)
    return np.diag(-H_kk[placement.rows, placement.cols]).astype(complex)


def quantize_taps(L2: np.ndarray, spec: TapHardwareSpec, rng: np.random.Generator) -> np.ndarray:
    """Apply random tap-setting errors to the diagonal of ``L2``.

    Each tap gets an independent attenuation error (uniform on +-half the
    attenuation step, dB) and phase error (uniform on +-half the phase step,
    degrees). The rng is consumed only when errors are enabled: all
    attenuation errors first, then all phase errors.
    """
    L2 = np.asarray(L2)
    if spec.error_model is TapErrorModel.NONE:
        return L2
    n = L2.shape[0]
    eps_a = rng.uniform(-spec.attenuation_step_db / 2, spec.attenuation_step_db / 2, n)
    eps_p = rng.uniform(-spec.phase_step_deg / 2, spec.phase_step_deg / 2, n)
    factor = 10.0 ** (eps_a / 20.0) * np.exp(1j * np.deg2rad(eps_p))
    return np.diag(np.diag(L2) * factor)


def compose(L1: np.ndarray, L2: np.ndarray, L3: np.ndarray) -> np.ndarray:
    if L3.shape[1] != L2.shape[0] or L2.shape[0] != L2.shape[1] or L2.shape[1] != L1.shape[0]:
        raise ValueError(f"incompatible canceller factors L3{L3.shape} L2{L2.shape} L1{L1.shape}")
    return L3 @ L2 @ L1


def residual_channel(H_kk: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Effective SI channel seen by the RX chains after analog cancellation."""
    if H_kk.shape != C.shape:
        raise ValueError(f"H_kk{H_kk.shape} and C{C.shape} differ in shape")
    return H_kk + C


def build_canceller(
    H_kk: np.ndarray,
    placement: TapPlacement,
    tap_spec: TapHardwareSpec | None = None,
    rng: np.random.Generator | None = None,
) -> CancellerRealization:
    """Selection matrices plus ideal (optionally quantized) taps for ``placement``."""
    m, n = H_kk.shape
    L1, L3 = build_selection_matrices(placement, n, m)
    L2 = ideal_tap_values(H_kk, placement)
    if tap_spec is not None and tap_spec.error_model is not TapErrorModel.NONE:
        if rng is None:
            raise ValueError("quantized taps need an rng")
        L2 = quantize_taps(L2, tap_spec, rng)
    return CancellerRealization(L1, L2, L3, placement)


def enumerate_placements(
    n_tx: int, n_rx: int, n_taps: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[TapPlacement]:
    """Every ``n_taps``-subset of the ``n_rx * n_tx`` positions, lexicographic."""
    total = n_rx * n_tx
    if not 0 <= n_taps <= total:
        raise ValueError(f"cannot place {n_taps} taps in a {n_rx}x{n_tx} canceller")
    count = math.comb(total, n_taps)
    if count > cap:
        raise EnumerationTooLarge(
            f"{count} placements exceed the enumeration cap {cap}; "
            "use a heuristic strategy (largest_amplitude, row_wise, column_wise, first_rows)"
        )
    grid = [(i, j) for i in range(1, n_rx + 1) for j in range(1, n_tx + 1)]
    for combo in itertools.combinations(grid, n_taps):
        yield TapPlacement(combo, PlacementStrategy.EXHAUSTIVE, (n_rx, n_tx))


def tap_reduction_percent(n_taps: int, n_tx: int, n_rx: int) -> float:
    """Tap saving relative to one tap per TX-RX chain pair."""
    return 100.0 * (1.0 - n_taps / (n_rx * n_tx))
