# Input: MeasurementMatrix, compressed measurement y, IhtConfig
# Output: IhtResult (L-sparse estimate with diagnostics)
# Pos: iterative hard thresholding reconstruction at the PS
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
IHT 重构模块

迭代：x⁰ = 0，x^{i+1} = H_L(x^i + A^H (y − A x^i))，步长固定为 1。
‖A‖_op < 1 时残差单调不增；停止条件 ‖x^{i+1} − x^i‖² < ε 或达到 max_iters。
"""

import numpy as np

from src.config.models import IhtConfig
from src.linmap.matrix import adjoint, compress
from src.models import (
    BasebandVector,
    IhtDivergedError,
    IhtResult,
    MeasurementMatrix,
    SparseApprox,
)
from src.sparsify.masks import apply_mask, top_l_support
from src.utils.helpers import squared_norm

# 单调性检查的绝对容差
MONOTONE_SLACK = 1e-9


def hard_threshold(x: BasebandVector, L: int) -> SparseApprox:
    """
    H_L：保留模最大的 L 个元素（模相等时下标小者优先），其余置 0
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if L > x.size:
        raise ValueError(f"hard_threshold 稀疏度超过长度: L={L} > {x.size}")
    return apply_mask(x, top_l_support(x, L))


def default_epsilon(y: BasebandVector) -> float:
    """ε 默认值：1e-8 · max(1, ‖y‖²)"""
    return 1e-8 * max(1.0, squared_norm(y))


def iht_reconstruct(
    A: MeasurementMatrix,
    y: BasebandVector,
    cfg: IhtConfig,
    *,
    strict: bool = False,
) -> IhtResult:
    """
    由压缩测量 y 重构 L 稀疏估计

    Args:
        A: 测量矩阵（M×N）
        y: 长度 M 的测量向量
        cfg: IHT 配置
        strict: 为 True 时逐次检查残差单调性（测试用）

    Returns:
        IhtResult（未收敛时返回最后一次迭代并置 converged=False）

    Raises:
        ValueError: 维度不一致或 L > N
        IhtDivergedError: 迭代出现 NaN/Inf
        RuntimeError: strict 模式下残差上升
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if y.size != A.m:
        raise ValueError(f"IHT 测量长度不匹配: len(y)={y.size} M={A.m}")
    if cfg.sparsity_l > A.n:
        raise ValueError(f"IHT 稀疏度超过信号长度: L={cfg.sparsity_l} N={A.n}")

    epsilon = cfg.epsilon if cfg.epsilon is not None else default_epsilon(y)

    # ä»é¶åéå¼å§ï¼é¦è½®å³ H_L(A^H y)
    x = np.zeros(A.n, dtype=np.complex128)
    estimate = apply_mask(x, top_l_support(x, cfg.sparsity_l))
    residual = y.copy()
    residual_norm = squared_norm(residual)
    converged = False
    iteration = 0

    for iteration in range(1, cfg.max_iters + 1):
        # åä½æ­¥é¿æ¢¯åº¦æ­¥åç¡¬éå¼
        estimate = hard_threshold(x + adjoint(A, residual), cfg.sparsity_l)
        x_new = estimate.dense
        if not np.all(np.isfinite(x_new)):
            raise IhtDivergedError(f"IHT 第 {iteration} 次迭代出现非有限值", iteration=iteration)

        change = squared_norm(x_new - x)
        residual = y - compress(A, x_new)
        new_residual_norm = squared_norm(residual)
        if strict and new_residual_norm > residual_norm + MONOTONE_SLACK:
            raise RuntimeError(
                f"IHT 残差上升: iteration={iteration} {residual_norm} -> {new_residual_norm}"
            )
        x = x_new
        residual_norm = new_residual_norm

        # ç¸é»ä¸¤æ¬¡ä¼°è®¡çååè¶³å¤å°å³åæ­¢
        if change < epsilon:
            converged = True
            break

    return IhtResult(
        estimate=estimate,
        iterations=iteration,
        converged=converged,
        final_residual=residual_norm,
    )
