# Input: baseband mapping and random stream modules
# Output: numcore exports
# Pos: numcore package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
数值基础模块

导出：
- to_baseband, from_baseband: 实数 ↔ 复基带映射
- RngStream, rng_stream: 带标签的确定性随机流
"""

from src.numcore.baseband import to_baseband, from_baseband
from src.numcore.rng import RngStream, rng_stream

__all__ = ["to_baseband", "from_baseband", "RngStream", "rng_stream"]
