# Input: masks module
# Output: sparsify exports
# Pos: sparsify package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
稀疏化模块

导出：
- top_l_support, uniform_support: 支撑集构造
- apply_mask, reduce, expand: 掩码应用 / 降维 / 回填
"""

from src.sparsify.masks import top_l_support, uniform_support, apply_mask, reduce, expand

__all__ = ["top_l_support", "uniform_support", "apply_mask", "reduce", "expand"]
