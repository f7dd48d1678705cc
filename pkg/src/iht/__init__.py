# Input: solver module
# Output: iht exports
# Pos: iht package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
IHT 重构模块

导出：
- hard_threshold: H_L 阈值算子
- iht_reconstruct: 迭代硬阈值重构
- default_epsilon: 默认停止阈值
"""

from src.iht.solver import hard_threshold, iht_reconstruct, default_epsilon

__all__ = ["hard_threshold", "iht_reconstruct", "default_epsilon"]
