# Input: numeric values, time
# Output: formatted values and small numeric helpers
# Pos: utility functions
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
工具函数模块

职责：
- 浮点数格式化（日志/表格）
- 时间戳工具
- 通用数值辅助
"""

import math
import time
from typing import Optional

import numpy as np


def format_float(value: Optional[float], digits: int = 6) -> Optional[str]:
    """
    格式化浮点数（用于日志），保留指定有效数字。

    Args:
        value: 原始值
        digits: 有效数字位数
    """
    if value is None:
        return None
    if digits <= 0:
        raise ValueError("digits must be positive")
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"


def current_time_ms() -> int:
    """
    获取当前时间戳（毫秒）

    Returns:
        当前时间戳
    """
    return int(time.time() * 1000)


def squared_norm(x: np.ndarray) -> float:
    """||x||_2^2（实数或复数向量）"""
    return float(np.vdot(x, x).real)


def half_ceil(d: int) -> int:
    """ceil(d/2)：实数维度 d 对应的基带长度 N"""
    if d < 1:
        raise ValueError(f"维度必须为正: d={d}")
    return (d + 1) // 2
