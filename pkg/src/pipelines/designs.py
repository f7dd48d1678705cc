# Input: DesignSpec, per-device model updates, channel config, measurement matrix, RngStream
# Output: estimated aggregate update, TransmitResult, (ModelParams, RoundMetrics) per round, support log lines
# Pos: the four OtA communication designs and the FedAvg round pipeline
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
通信设计流水线

四种设计（每轮信道使用次数 N / L / M / M）：
- case1：完整基带向量直接 OtA 传输
- case2：相同掩码稀疏化后降维到 L，PS 端按支撑集回填
- case3：稀疏化后经 A 压缩到 M，PS 端 IHT 重构
- case4：不稀疏化直接压缩到 M，PS 端以人为稀疏度 L 做 IHT

η 按各设计实际发送的向量计算。真实聚合量仅用于指标（及 top_l_oracle 掩码这一仿真理想化）。

随机流标签（相对实验根流）：
select/{t}、local/{t}/{k}、channel/{t}、noise/{t}、mask/{t}、matrix/{t}
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from src.airchan.channel import compute_eta, draw_channels, ota_estimate, ota_round, truncate
from src.config.models import ChannelConfig, DesignSpec, SgdConfig
from src.fedcore.model import Mlp
from src.fedcore.training import apply_aggregate, evaluate, local_update, select_devices
from src.iht.solver import iht_reconstruct
from src.linmap.matrix import compress, generate_matrix
from src.models import (
    ChannelRound,
    Dataset,
    DesignKind,
    DevicePartition,
    IhtResult,
    MaskMode,
    MeasurementMatrix,
    ModelParams,
    RealVector,
    ReducedVector,
    RoundMetrics,
    Support,
    TransmitReport,
)
from src.numcore.baseband import from_baseband, to_baseband
from src.numcore.rng import RngStream
from src.pipelines.metrics import agg_nmse
from src.sparsify.masks import apply_mask, expand, reduce, top_l_support, uniform_support
from src.utils.helpers import squared_norm
from src.utils.logger import log_event, log_skip, log_support


@dataclass(frozen=True, eq=False)
class TransmitResult:
    """一次设计传输的结果"""
    estimate: RealVector
    channel_uses: int
    eta: float
    report: TransmitReport
    iht: Optional[IhtResult] = None
    supports: tuple[Support, ...] = ()


@dataclass(eq=False)
class RoundContext:
    """
    轮次流水线状态

    last_truth / last_estimate 保存最近一轮的真实与估计聚合量（供直方图快照）。
    last_channel 保存最近一次实际传输的信道状态。
    """
    model: Mlp
    partitions: list[DevicePartition]
    testset: Dataset
    sgd: SgdConfig
    channel: ChannelConfig
    seed: int = 0
    matrix: Optional[MeasurementMatrix] = None
    last_truth: Optional[RealVector] = None
    last_estimate: Optional[RealVector] = None
    last_channel: Optional[ChannelRound] = None


def _shared_support(
    design: DesignSpec,
    mode: MaskMode,
    signals: npt.NDArray[np.complex128],
    weights: npt.NDArray[np.float64],
    mask_rng: RngStream,
) -> Support:
    N = signals.shape[1]
    if mode == MaskMode.UNIFORM_IDENTICAL:
        return uniform_support(mask_rng, N, design.sparsity_l)
    # top_l_oracle：真实聚合量的 top-L（PS 实际无法获得）
    return top_l_support(weights @ signals, design.sparsity_l)


def _compressed_ota(
    design: DesignSpec,
    matrix: MeasurementMatrix,
    sent: npt.NDArray[np.complex128],
    weights: npt.NDArray[np.float64],
    gains: npt.NDArray[np.complex128],
    channel: ChannelConfig,
    noise_rng: RngStream,
) -> tuple[npt.NDArray[np.complex128], float, TransmitReport, IhtResult]:
    eta = compute_eta(channel.p_tot, weights, gains, np.linalg.norm(sent, axis=1))
    y, report = ota_round(sent, weights, gains, eta, channel.sigma2, noise_rng, total_power=channel.p_tot)
    result = iht_reconstruct(matrix, ota_estimate(y, eta), design.iht_config())
    if not result.converged:
        log_event(
            "iht_unconverged",
            iterations=result.iterations,
            residual=result.final_residual,
        )
    return result.estimate.dense, eta, report, result


def transmit_aggregate(
    design: DesignSpec,
    updates: Sequence[RealVector],
    weights: Sequence[float] | npt.NDArray[np.float64],
    gains: Sequence[complex] | npt.NDArray[np.complex128],
    channel: ChannelConfig,
    *,
    noise_rng: RngStream,
    mask_rng: Optional[RngStream] = None,
    matrix: Optional[MeasurementMatrix] = None,
) -> TransmitResult:
    """
    将活跃设备的更新按设计经 OtA 信道传输，返回 PS 端的聚合估计

    Args:
        design: 通信设计
        updates: 活跃设备的 Δθ_k（等长实向量）
        weights: 对应权重 w_k
        gains: 对应信道增益 h_k
        channel: 信道参数（P_tot, σ²）
        noise_rng: 噪声随机流
        mask_rng: 掩码随机流（case2/3 的均匀相同掩码）
        matrix: 测量矩阵（case3/4）

    Returns:
        TransmitResult

    Raises:
        ValueError: 缺少矩阵/掩码流或维度不一致
        IhtDivergedError: IHT 发散
        PowerBudgetError: 发送能量超预算
    """
    if not updates:
        raise ValueError("transmit_aggregate 至少需要一个设备")
    d = int(np.asarray(updates[0]).size)
    # å®æ°æ´æ° â å¤åºå¸¦
    signals = np.stack([to_baseband(u) for u in updates])
    w = np.asarray(weights, dtype=np.float64)
    h = np.asarray(gains, dtype=np.complex128)
    N = signals.shape[1]
    mode = design.effective_mask_mode

    # è¾å¥æ ¡éª
    if design.uses_matrix:
        if matrix is None:
            raise ValueError(f"{design.kind.value} 需要测量矩阵")
        if matrix.n != N or matrix.m != design.compressed_m:
            raise ValueError(f"测量矩阵尺寸不匹配: {matrix.m}x{matrix.n}，期望 {design.compressed_m}x{N}")
    if mode == MaskMode.UNIFORM_IDENTICAL and mask_rng is None:
        raise ValueError("均匀相同掩码需要 mask_rng")

    # case1ï¼N ä¸ªç¬¦å·ç´æ¥å å 
    if design.kind == DesignKind.CASE1_UNCOMPRESSED:
        eta = compute_eta(channel.p_tot, w, h, np.linalg.norm(signals, axis=1))
        y, report = ota_round(signals, w, h, eta, channel.sigma2, noise_rng, total_power=channel.p_tot)
        estimate = from_baseband(ota_estimate(y, eta), d)
        return TransmitResult(estimate, N, eta, report)

    # case2ï¼å±ç¨æ¯æä¸éç»´å° L ä¸ªç¬¦å·ï¼æ¥æ¶ç«¯ææ¯æå±å¼
    if design.kind == DesignKind.CASE2_SPARSE_REDUCED:
        assert mode is not None
        support = _shared_support(design, mode, signals, w, mask_rng)  # type: ignore[arg-type]
        reduced = np.stack([reduce(apply_mask(s, support)).values for s in signals])
        eta = compute_eta(channel.p_tot, w, h, np.linalg.norm(reduced, axis=1))
        y, report = ota_round(reduced, w, h, eta, channel.sigma2, noise_rng, total_power=channel.p_tot)
        expanded = expand(ReducedVector(ota_estimate(y, eta), support), N)
        # å¯éç N/L æ åç¼©æ¾
        if design.case2_debias:
            expanded = expanded * (N / design.sparsity_l)
        return TransmitResult(from_baseband(expanded, d), len(support), eta, report, supports=(support,))

    assert matrix is not None
    # case3 åç¨çåååç¼©ï¼case4 ç´æ¥åç¼©ï¼ä¸¤èé½ç» IHT éæ
    if design.kind == DesignKind.CASE3_SPARSE_COMPRESSED:
        if mode == MaskMode.TOP_L_PER_DEVICE:
            supports = tuple(top_l_support(s, design.sparsity_l) for s in signals)
        else:
            assert mode is not None
            shared = _shared_support(design, mode, signals, w, mask_rng)  # type: ignore[arg-type]
            supports = tuple(shared for _ in signals)
        sparse = np.stack([apply_mask(s, S).dense for s, S in zip(signals, supports)])
        sent = np.stack([compress(matrix, s) for s in sparse])
    else:
        supports = ()
        sent = np.stack([compress(matrix, s) for s in signals])

    dense, eta, report, result = _compressed_ota(design, matrix, sent, w, h, channel, noise_rng)
    return TransmitResult(from_baseband(dense, d), matrix.m, eta, report, iht=result, supports=supports)


def _log_supports(seed: int, round_index: int, supports: Sequence[Support], device_ids: npt.NDArray[np.int64]) -> None:
    if not supports:
        return
    # 共用掩码只记一次
    if all(S is supports[0] for S in supports):
        log_support(seed, round_index, supports[0].to_text())
        return
    for k, S in zip(device_ids, supports):
        log_support(seed, round_index, S.to_text(), device=int(k))


def _nmse_or_nan(truth: RealVector, estimate: RealVector) -> float:
    if squared_norm(truth) == 0:
        return float("nan")
    return agg_nmse(truth, estimate)


def run_round(
    design: DesignSpec,
    theta: ModelParams,
    ctx: RoundContext,
    rng: RngStream,
    round_index: int,
) -> tuple[ModelParams, RoundMetrics]:
    """
    执行一轮 FedAvg（广播 → 选择 → 本地更新 → 设计传输 → 更新全局模型 → 评估）

    Args:
        design: 通信设计
        theta: 本轮开始时的全局模型
        ctx: 轮次上下文（数据、模型、信道参数、测量矩阵）
        rng: 实验根随机流，本轮各阶段按标签派生子流
        round_index: 轮次（从 1 开始）

    Returns:
        (新全局模型, RoundMetrics)；截断后无设备时模型不变且 skipped=True
    """
    t = round_index
    channel = ctx.channel
    # éæ©è®¾å¤å¹¶ææ ·æ¬æ°å½ä¸åæé
    selected = select_devices(rng.child(f"select/{t}"), channel.k_total, channel.k_per_round)
    parts = [ctx.partitions[int(k)] for k in selected]
    weights = np.array([p.weight for p in parts], dtype=np.float64)
    weights = weights / weights.sum()

    # æ¬å°è®­ç»
    updates = [
        local_update(theta, p, ctx.sgd, rng.child(f"local/{t}/{p.device_id}"), model=ctx.model)
        for p in parts
    ]
    # çæ³èåéï¼ä»ç¨äº NMSE
    truth = weights @ np.stack(updates)

    # ä¿¡éä¸æªæ­
    gains = draw_channels(rng.child(f"channel/{t}"), len(parts))
    active = truncate(gains, channel.h_th, channel.h_th_mode)
    if active.size == 0:
        log_skip(ctx.seed, t, "截断后无活跃设备")
        ctx.last_truth, ctx.last_estimate = truth, np.zeros_like(truth)
        metrics = RoundMetrics(
            round=t,
            channel_uses=0,
            test_accuracy=evaluate(theta, ctx.testset, model=ctx.model),
            agg_nmse=_nmse_or_nan(truth, np.zeros_like(truth)),
            eta=float("nan"),
            skipped=True,
            seed=ctx.seed,
        )
        return theta, metrics

    active_weights = weights[active]
    # æªæ­è®¾å¤é»è®¤ä¸éæ°åéæé
    if channel.truncation_reweight:
        active_weights = active_weights / active_weights.sum()

    matrix = ctx.matrix
    # æ¯è½®éæ°çæç©éµ
    if design.uses_matrix and (matrix is None or design.matrix_per_round):
        matrix = generate_matrix(
            rng.child(f"matrix/{t}"), design.compressed_m, to_baseband(truth).size, design.matrix_c
        )

    result = transmit_aggregate(
        design,
        [updates[int(i)] for i in active],
        active_weights,
        gains[active],
        channel,
        noise_rng=rng.child(f"noise/{t}"),
        mask_rng=rng.child(f"mask/{t}"),
        matrix=matrix,
    )

    _log_supports(ctx.seed, t, result.supports, selected[active])
    ctx.last_channel = ChannelRound(
        gains=gains,
        active_set=active,
        eta=result.eta,
        noise_var=channel.sigma2,
        total_power=channel.p_tot,
        symbol_count=result.channel_uses,
    )
    # æ´æ°å¨å±æ¨¡åå¹¶è¯ä¼°
    new_theta = apply_aggregate(theta, result.estimate)
    ctx.last_truth, ctx.last_estimate = truth, result.estimate
    metrics = RoundMetrics(
        round=t,
        channel_uses=result.channel_uses,
        test_accuracy=evaluate(new_theta, ctx.testset, model=ctx.model),
        agg_nmse=_nmse_or_nan(truth, result.estimate),
        eta=result.eta,
        iht_iterations=None if result.iht is None else result.iht.iterations,
        converged=None if result.iht is None else result.iht.converged,
        seed=ctx.seed,
        active_devices=int(active.size),
        device_ids=selected[active],
        per_device_energy=result.report.per_device_energy,
    )
    return new_theta, metrics
