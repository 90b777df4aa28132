"""Random channel draws and power unit conversions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class FadingKind(enum.Enum):
    RAYLEIGH = "rayleigh"
    RICEAN = "ricean"


@dataclass(frozen=True)
class FadingSpec:
    """Large-scale gain and small-scale fading law of one link."""

    kind: FadingKind
    path_loss_db: float
    k_factor_db: float | None = None

    def __post_init__(self):
        if not self.path_loss_db >= 0:
            raise ValueError(f"path_loss_db must be >= 0, got {self.path_loss_db}")
        if self.kind is FadingKind.RICEAN:
            if self.k_factor_db is None or math.isnan(self.k_factor_db) or self.k_factor_db == math.inf:
                raise ValueError("Ricean fading needs a finite k_factor_db (or -inf for K=0)")

    def draw(self, rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is FadingKind.RAYLEIGH:
            return gen_rayleigh(rows, cols, self.path_loss_db, rng)
        return gen_ricean(rows, cols, self.path_loss_db, self.k_factor_db, rng)


def dbm_to_mw(p):
    """dBm -> mW. Scalars give floats, arrays give arrays."""
    out = 10.0 ** (np.asarray(p, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def mw_to_dbm(p):
    """mW -> dBm. Raises ``ValueError`` for non-positive powers."""
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"mw_to_dbm needs positive power, got {p!r}")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def _cn(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian, row-major draw order.

    Real and imaginary parts are interleaved per entry so entry (i, j) uses
    draws 2(i*cols+j) and 2(i*cols+j)+1.
    """
    z = rng.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def _check_shape(rows, cols):
    if rows < 1 or cols < 1:
        raise ValueError(f"channel shape must be positive, got ({rows}, {cols})")


def gen_rayleigh(rows: int, cols: int, path_loss_db: float, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh channel with per-entry power ``10**(-path_loss_db/10)``."""
    _check_shape(rows, cols)
    gain = 10.0 ** (-path_loss_db / 10.0)
    return math.sqrt(gain) * _cn(rows, cols, rng)


def gen_ricean(
    rows: int, cols: int, path_loss_db: float, k_factor_db: float, rng: np.random.Generator
) -> np.ndarray:
    """Ricean channel: ``sqrt(g) * (sqrt(K/(K+1)) * ones + sqrt(1/(K+1)) * NLOS)``.

    The LOS part is the all-ones matrix. ``k_factor_db=-inf`` gives K=0
    (pure Rayleigh). The NLOS part is always drawn, so the rng advances by
    the same amount for every K.
    """
    _check_shape(rows, cols)
    gain = 10.0 ** (-path_loss_db / 10.0)
    nlos = _cn(rows, cols, rng)
    if k_factor_db == -math.inf:
        los_w, nlos_w = 0.0, 1.0
    else:
        # keep the weights accurate when K overflows
        inv = 10.0 ** (-k_factor_db / 10.0)  # 1/K
        los_w = math.sqrt(1.0 / (1.0 + inv))
        nlos_w = math.sqrt(inv / (1.0 + inv))
    return math.sqrt(gain) * (los_w * np.ones((rows, cols)) + nlos_w * nlos)
