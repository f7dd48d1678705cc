# Input: RngStream, per-device signals, weights, channel gains, P_tot, sigma^2
# Output: gains, active set, eta, received superposition, TransmitReport, post-scaled estimate
# Pos: over-the-air multiple-access channel simulation
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
空中计算（OtA）信道模块

职责：
- 块衰落信道增益 h_k ~ CN(0, 1)（每轮抽取一次，轮内不变）
- 门限截断：丢弃信道差的设备（不重新加权，保留截断带来的偏差）
- 计算幅度缩放因子 η，使每个设备满足总功率约束 ||ψ_k(s_k)||² ≤ P_tot
- 信道反转预处理 ψ_k(s_k) = s_k·η·w_k/h_k，叠加并加噪 CN(0, σ²)
- PS 端后处理 y/η
"""

from typing import Sequence

import numpy as np
import numpy.typing as npt

from src.models import BasebandVector, PowerBudgetError, ThresholdMode, TransmitReport
from src.numcore.rng import RngStream

# 功率预算相对容差
POWER_SLACK = 1e-9


def draw_channels(rng: RngStream, K: int) -> npt.NDArray[np.complex128]:
    """
    抽取 K 个 i.i.d. CN(0,1) 信道增益

    Args:
        rng: 随机流（通常为 (seed, "channel/{round}")）
        K: 设备数
    """
    if K < 1:
        raise ValueError(f"设备数必须为正: K={K}")
    return rng.complex_normal(K, 1.0)


def truncate(
    gains: npt.NDArray[np.complex128],
    h_th: float,
    mode: ThresholdMode = ThresholdMode.MAGNITUDE,
) -> npt.NDArray[np.int64]:
    """
    门限截断

    Args:
        gains: 信道增益
        h_th: 门限（≥ 0）
        mode: MAGNITUDE 比较 |h_k|，POWER 比较 |h_k|²

    Returns:
        存活设备的位置下标；为空表示本轮跳过
    """
    if h_th < 0:
        raise ValueError(f"截断门限不能为负: h_th={h_th}")
    magnitude = np.abs(np.asarray(gains))
    metric = magnitude if mode == ThresholdMode.MAGNITUDE else magnitude**2
    return np.flatnonzero(metric >= h_th).astype(np.int64)


def compute_eta(
    P_tot: float,
    weights: Sequence[float] | npt.NDArray[np.float64],
    gains: Sequence[complex] | npt.NDArray[np.complex128],
    signal_norms: Sequence[float] | npt.NDArray[np.float64],
) -> float:
    """
    η = √P_tot · min_k |h_k| / (w_k ‖s_k‖)

    ‖s_k‖ = 0（或 w_k = 0）的设备不发送任何能量，不参与取最小值；
    全部为零时返回 √P_tot。
    """
    if P_tot <= 0:
        raise ValueError(f"总功率必须为正: P_tot={P_tot}")
    w = np.asarray(weights, dtype=np.float64)
    h = np.abs(np.asarray(gains, dtype=np.complex128))
    norms = np.asarray(signal_norms, dtype=np.float64)
    if not (w.shape == h.shape == norms.shape):
        raise ValueError(f"compute_eta 输入长度不一致: w={w.shape} h={h.shape} norms={norms.shape}")

    # åªå¨å®éåéçè®¾å¤ä¸åæå°å¼
    transmitting = (norms > 0) & (w > 0)
    if not np.any(transmitting):
        return float(np.sqrt(P_tot))
    ratios = h[transmitting] / (w[transmitting] * norms[transmitting])
    return float(np.sqrt(P_tot) * np.min(ratios))


def ota_round(
    signals: Sequence[BasebandVector] | npt.NDArray[np.complex128],
    weights: Sequence[float] | npt.NDArray[np.float64],
    gains: Sequence[complex] | npt.NDArray[np.complex128],
    eta: float,
    sigma2: float,
    rng: RngStream,
    *,
    total_power: float,
) -> tuple[BasebandVector, TransmitReport]:
    """
    一次 OtA 叠加传输

    Args:
        signals: 活跃设备的发送向量（等长）
        weights: 对应权重 w_k
        gains: 对应信道增益 h_k
        eta: 幅度缩放因子
        sigma2: 噪声方差 σ²
        rng: 噪声随机流（通常为 (seed, "noise/{round}")）
        total_power: 每设备能量预算 P_tot

    Returns:
        (y, TransmitReport)，y = Σ h_k ψ_k(s_k) + n

    Raises:
        PowerBudgetError: 任一设备能量超过 P_tot·(1+1e-9)
    """
    s = np.atleast_2d(np.asarray(signals, dtype=np.complex128))
    w = np.asarray(weights, dtype=np.float64)
    h = np.asarray(gains, dtype=np.complex128)
    if s.shape[0] != w.size or w.size != h.size:
        raise ValueError(f"ota_round 输入未对齐: signals={s.shape[0]} w={w.size} h={h.size}")
    if eta <= 0:
        raise ValueError(f"eta 必须为正: {eta}")
    if sigma2 < 0:
        raise ValueError(f"噪声方差不能为负: {sigma2}")

    # 信道反转预处理
    psi = s * (eta * w / h)[:, None]
    energy = np.sum(np.abs(psi) ** 2, axis=1)
    limit = total_power * (1.0 + POWER_SLACK)
    over = np.flatnonzero(energy > limit)
    if over.size > 0:
        k = int(over[0])
        raise PowerBudgetError(
            f"设备发送能量超过预算: device={k} energy={energy[k]} P_tot={total_power}",
            device=k,
            energy=float(energy[k]),
            budget=total_power,
        )

    # ç»ä¿¡éå å å¹¶å åª
    received = np.sum(h[:, None] * psi, axis=0)
    if sigma2 > 0:
        received = received + rng.complex_normal(s.shape[1], sigma2)
    return received, TransmitReport(per_device_energy=energy, budget=total_power)


def ota_estimate(y: BasebandVector, eta: float) -> BasebandVector:
    """PS 后处理：y / η"""
    if eta <= 0:
        raise ValueError(f"eta 必须为正: {eta}")
    return np.asarray(y, dtype=np.complex128) / eta
