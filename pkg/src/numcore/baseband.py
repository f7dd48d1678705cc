# Input: real-valued model update vectors
# Output: complex baseband vectors and their exact inverse
# Pos: numcore real<->complex mapping
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
实数 ↔ 复基带映射

打包顺序固定：前一半 → 实部，后一半 → 虚部；d 为奇数时虚部最后一位补 0，
接收端按 d 丢弃补位。映射是等距的：||to_baseband(v)|| == ||v||。
"""

import numpy as np

from src.models import BasebandVector, RealVector
from src.utils.helpers import half_ceil


def to_baseband(v: RealVector) -> BasebandVector:
    """
    实数向量 → 复基带向量

    Args:
        v: 长度 d ≥ 1 的实数向量

    Returns:
        长度 N = ceil(d/2) 的复向量，s[j] = v[j] + i·v[j+N]
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("to_baseband 输入不能为空")
    if not np.all(np.isfinite(v)):
        raise ValueError("to_baseband 输入包含 NaN/Inf")
    d = int(v.size)
    n = half_ceil(d)
    imag = np.zeros(n, dtype=np.float64)
    imag[: d - n] = v[n:]
    return v[:n] + 1j * imag


def from_baseband(s: BasebandVector, d: int) -> RealVector:
    """
    复基带向量 → 实数向量（to_baseband 的精确逆）

    Args:
        s: 长度 ceil(d/2) 的复向量
        d: 原始实数维度

    Returns:
        长度 d 的实数向量（奇数 d 时丢弃补位）
    """
    n = half_ceil(d)
    s = np.asarray(s).reshape(-1)
    if s.size != n:
        raise ValueError(f"基带长度不匹配: len(s)={s.size} 期望 ceil({d}/2)={n}")
    return np.concatenate([s.real, s.imag[: d - n]]).astype(np.float64)
