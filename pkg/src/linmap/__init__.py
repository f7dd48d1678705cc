# Input: matrix module
# Output: linmap exports
# Pos: linmap package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
线性压缩模块

导出：
- generate_matrix, hypersphere_columns, operator_norm: 测量矩阵生成与范数认证
- compress, adjoint: 正向 / 伴随映射
- rip_probe, dump_matrix, load_matrix: 诊断与导出
"""

from src.linmap.matrix import (
    generate_matrix,
    hypersphere_columns,
    operator_norm,
    compress,
    adjoint,
    rip_probe,
    dump_matrix,
    load_matrix,
)

__all__ = [
    "generate_matrix",
    "hypersphere_columns",
    "operator_norm",
    "compress",
    "adjoint",
    "rip_probe",
    "dump_matrix",
    "load_matrix",
]
