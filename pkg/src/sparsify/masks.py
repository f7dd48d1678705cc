# Input: baseband vectors, sparsity level L, RngStream
# Output: Support / SparseApprox / ReducedVector
# Pos: sparsification masks, SPARSE-RD reduction and EXPAND
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
稀疏化模块

职责：
- top-L 支撑集（按复数模排序，模相等时下标小者优先）
- 均匀随机相同掩码（由 (seed, round) 派生，所有设备与 PS 可独立重建）
- 掩码应用、降维（SPARSE-RD）与回填（EXPAND）
"""

import numpy as np

from src.models import BasebandVector, ReducedVector, SparseApprox, Support
from src.numcore.rng import RngStream


def _check_level(L: int, n: int) -> None:
    if L < 1:
        raise ValueError(f"稀疏度 L 必须为正: L={L}")
    if L > n:
        raise ValueError(f"稀疏度超过向量长度: L={L} > N={n}")


def top_l_support(s: BasebandVector, L: int) -> Support:
    """
    取模最大的 L 个元素的下标

    Args:
        s: 基带向量（长度 N）
        L: 保留个数

    Returns:
        升序支撑集；模相等时下标小者优先
    """
    s = np.asarray(s).reshape(-1)
    _check_level(L, s.size)
    # 稳定排序保证相同模时低下标在前
    order = np.argsort(-np.abs(s), kind="stable")[:L]
    return Support(np.sort(order).astype(np.int64), int(s.size))


def uniform_support(rng: RngStream, N: int, L: int) -> Support:
    """
    均匀随机无放回抽取 L 个下标

    同一随机流状态得到同一掩码；调用方用 (seed, "mask/{round}") 派生流，
    保证本轮所有设备与 PS 使用相同掩码。
    """
    _check_level(L, N)
    return Support(rng.subset(N, L), N)


def apply_mask(s: BasebandVector, S: Support) -> SparseApprox:
    """
    应用掩码：支撑集内保留原值，其余置 0
    """
    s = np.asarray(s, dtype=np.complex128).reshape(-1)
    if S.ambient_dim != s.size:
        raise ValueError(f"掩码维度不匹配: support.ambient_dim={S.ambient_dim} len(s)={s.size}")
    dense = np.zeros_like(s)
    dense[S.indices] = s[S.indices]
    return SparseApprox(dense=dense, support=S)


def reduce(sp: SparseApprox) -> ReducedVector:
    """SPARSE-RD：仅保留支撑集上的元素（按下标升序）"""
    return ReducedVector(values=sp.dense[sp.support.indices].copy(), support=sp.support)


def expand(r: ReducedVector, N: int) -> BasebandVector:
    """
    EXPAND：将降维向量按支撑集回填到长度 N，其余位置补 0
    """
    idx = r.support.indices
    if idx.size > 0 and int(idx[-1]) >= N:
        raise ValueError(f"支撑集下标越界: max={int(idx[-1])} N={N}")
    out = np.zeros(N, dtype=np.complex128)
    out[idx] = r.values
    return out
