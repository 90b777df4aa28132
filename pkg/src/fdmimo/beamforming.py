"""TX precoding under a per-RX-chain residual SI budget, MMSE RX combining,
and the analytic downlink/uplink rates.

Shapes: the residual SI channel ``H_res`` is M_k x N_k, the precoder ``V``
is N_k x d', the downlink channel ``H_qk`` is M_q x N_k, the uplink channel
``h_km`` is M_k x 1, and the combiner ``u`` is a 1 x M_k row vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class PrecoderMode(enum.Enum):
    OPEN_LOOP = "open_loop"
    CLOSED_LOOP = "closed_loop"


class DegenerateChannelError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class PrecoderResult:
    V: np.ndarray
    alpha: int
    d_prime: int
    residual_si_per_chain_mw: np.ndarray
    feasible: bool

    @property
    def power_mw(self) -> float:
        return float(np.real(np.vdot(self.V, self.V)))


@dataclass(frozen=True)
class CombinerResult:
    u: np.ndarray
    sinr: float


def right_singular_basis(H: np.ndarray) -> np.ndarray:
    """N_k x N_k unitary whose columns are right-singular vectors of ``H``,
    ordered by decreasing singular value (null directions last)."""
    _, _, Wh = np.linalg.svd(np.asarray(H, dtype=complex), full_matrices=True)
    return Wh.conj().T


def openloop_precoder(F: np.ndarray, P_k: float, d_prime: int) -> np.ndarray:
    """Equal power on the first ``d_prime`` columns of ``F``: sqrt(P/d') [I; 0]."""
    alpha = F.shape[1]
    if not 1 <= d_prime <= alpha:
        raise ValueError(f"need 1 <= d' <= alpha, got d'={d_prime}, alpha={alpha}")
    G = np.zeros((alpha, d_prime), dtype=complex)
    G[:d_prime, :d_prime] = math.sqrt(P_k / d_prime) * np.eye(d_prime)
    return G


def waterfill(gains: np.ndarray, total_power: float) -> np.ndarray:
    """Capacity-optimal powers ``max(0, mu - 1/g_i)`` with ``sum = total_power``.

    ``gains`` are the eigenmode SNR gains (sigma_i^2 / noise). The water
    level is found exactly by growing the active set in order of gain.
    """
    gains = np.asarray(gains, dtype=float)
    order = np.argsort(-gains, kind="stable")
    g = gains[order]
    inv = np.full_like(g, math.inf)
    pos = g > 0
    inv[pos] = 1.0 / g[pos]
    n_active = 0
    mu = 0.0
    for k in range(1, int(pos.sum()) + 1):
        level = (total_power + inv[:k].sum()) / k
        if level > inv[k - 1]:
            n_active, mu = k, level
        else:
            break
    p = np.zeros_like(g)
    p[:n_active] = mu - inv[:n_active]
    out = np.zeros_like(gains)
    out[order] = p
    return out


def waterfilling_precoder(H_eff: np.ndarray, P_k: float, sigma_q2: float) -> np.ndarray:
    """Closed-loop precoder ``W diag(sqrt(p))`` over the active eigenmodes of ``H_eff``.

    Returns an alpha x d' matrix where d' counts the modes that get power.
    """
    _, s, Wh = np.linalg.svd(np.asarray(H_eff, dtype=complex), full_matrices=False)
    if s.size == 0 or not np.any(s > 0):
        raise DegenerateChannelError("water-filling on an all-zero channel")
    p = waterfill(s**2 / sigma_q2, P_k)
    active = p > 0
    return Wh.conj().T[:, active] * np.sqrt(p[active])


def residual_si_per_chain(H_res: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Residual SI power (mW) at the input of each RX chain: row norms of ``H_res V``."""
    HV = np.asarray(H_res) @ np.asarray(V)
    return np.sum(np.abs(HV) ** 2, axis=1)


def stream_precoder(
    F: np.ndarray,
    H_qk: np.ndarray,
    P_k: float,
    mode: PrecoderMode,
    sigma_q2: float | None,
) -> np.ndarray:
    """Inner precoder ``G`` for the effective downlink channel ``H_qk @ F``
    with ``min(M_q, alpha)`` streams (open loop) or water-filled modes."""
    d_prime = min(H_qk.shape[0], F.shape[1])
    if PrecoderMode(mode) is PrecoderMode.OPEN_LOOP:
        return openloop_precoder(F, P_k, d_prime)
    if sigma_q2 is None:
        raise ValueError("closed-loop precoding needs the downlink noise power sigma_q2")
    return waterfilling_precoder(H_qk @ F, P_k, sigma_q2)


def tx_precoding_alg1(
    H_kk: np.ndarray,
    H_qk: np.ndarray,
    C: np.ndarray,
    P_k: float,
    lambda_A: float,
    alpha_max: int,
    mode: PrecoderMode = PrecoderMode.OPEN_LOOP,
    sigma_q2: float | None = None,
) -> PrecoderResult:
    """TX digital precoding for a given canceller realization ``C``.

    Walks alpha from ``alpha_max`` down to 2, transmitting on the alpha
    weakest right-singular directions of ``H_kk + C``, and returns the first
    precoder whose per-chain residual SI is within ``lambda_A`` (mW). Falls
    back to the single weakest direction at full power; if that too violates
    the budget the result is flagged infeasible and carries those residuals.
    """
    H_res = np.asarray(H_kk) + np.asarray(C)
    n_tx = H_res.shape[1]
    if not 1 <= alpha_max <= n_tx:
        raise ValueError(f"alpha_max must be in [1, {n_tx}], got {alpha_max}")
    D = right_singular_basis(H_res)

    for alpha in range(alpha_max, 1, -1):
        F = D[:, n_tx - alpha :]
        G = stream_precoder(F, H_qk, P_k, mode, sigma_q2)
        V = F @ G
        res = residual_si_per_chain(H_res, V)
        if np.all(res <= lambda_A):
            return PrecoderResult(V, alpha, G.shape[1], res, True)

    V = D[:, n_tx - 1 :] * math.sqrt(P_k)
    res = residual_si_per_chain(H_res, V)
    return PrecoderResult(V, 1, 1, res, bool(np.all(res <= lambda_A)))


def _interference_plus_noise(H_res, V, sigma_k2):
    HV = np.asarray(H_res) @ np.asarray(V)
    return HV @ HV.conj().T + sigma_k2 * np.eye(HV.shape[0])


def rx_combiner(H_res: np.ndarray, V: np.ndarray, h_km: np.ndarray, P_m: float, sigma_k2: float) -> CombinerResult:
    """Unit-norm SINR-maximizing combiner.

    The matrix ``P_m B^{-1} h h^H`` (``B`` = SI covariance + noise) has rank
    one, so its dominant eigenvector is ``B^{-1} h``; ``u`` is its normalized
    conjugate transpose.
    """
    if not sigma_k2 > 0:
        raise ValueError("sigma_k2 must be positive")
    h = np.asarray(h_km).reshape(-1, 1)
    B = _interference_plus_noise(H_res, V, sigma_k2)
    w = np.linalg.solve(B, h)
    norm = np.linalg.norm(w)
    if not norm > 0:
        raise np.linalg.LinAlgError("uplink channel is zero; combiner undefined")
    u = (w / norm).conj().T
    HV = np.asarray(H_res) @ np.asarray(V)
    return CombinerResult(u, _sinr_res(u, h, HV, P_m, sigma_k2))


def _sinr_res(u, h, HV, P_m, sigma_k2):
    u = np.asarray(u).reshape(1, -1)
    signal = P_m * abs((u @ h).item()) ** 2
    interference = float(np.sum(np.abs(u @ HV) ** 2))
    noise = sigma_k2 * float(np.real(np.vdot(u, u)))
    return signal / (interference + noise)


def sinr(
    C: np.ndarray,
    V: np.ndarray,
    u: np.ndarray,
    h_km: np.ndarray,
    H_kk: np.ndarray,
    P_m: float,
    sigma_k2: float,
) -> float:
    """Post-combining uplink SINR for combiner ``u`` (any nonzero scale)."""
    u = np.asarray(u).reshape(1, -1)
    if not np.linalg.norm(u) > 0:
        raise ValueError("combiner must be nonzero")
    HV = (np.asarray(H_kk) + np.asarray(C)) @ np.asarray(V)
    return _sinr_res(u, np.asarray(h_km).reshape(-1, 1), HV, P_m, sigma_k2)


def rate_dl(V: np.ndarray, H_qk: np.ndarray, sigma_q2: float) -> float:
    """``log2 det(I + H V V^H H^H / sigma_q2)`` via a Cholesky factor."""
    if not sigma_q2 > 0:
        raise ValueError("sigma_q2 must be positive")
    HV = np.asarray(H_qk) @ np.asarray(V)
    M = np.eye(HV.shape[0]) + (HV @ HV.conj().T) / sigma_q2
    M = 0.5 * (M + M.conj().T)
    L = np.linalg.cholesky(M)
    return float(2.0 * np.sum(np.log2(np.real(np.diag(L)))))


def rate_ul(gamma: float) -> float:
    if gamma < 0:
        raise ValueError(f"SINR must be nonnegative, got {gamma}")
    return math.log2(1.0 + gamma)
