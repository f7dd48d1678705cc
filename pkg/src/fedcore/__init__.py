# Input: data, partition, model and training modules
# Output: fedcore exports
# Pos: fedcore package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
联邦学习基础模块

导出：
- load_mnist, synthetic_blobs, read_idx_images, read_idx_labels: 数据集
- partition_noniid, partition_iid: 数据划分
- Mlp, mlp_param_count: 模型
- select_devices, local_update, apply_aggregate, evaluate: 训练步骤
"""

from src.fedcore.data import load_mnist, read_idx_images, read_idx_labels, synthetic_blobs
from src.fedcore.model import Mlp, mlp_param_count
from src.fedcore.partition import partition_iid, partition_noniid
from src.fedcore.training import apply_aggregate, evaluate, local_update, select_devices

__all__ = [
    "load_mnist",
    "read_idx_images",
    "read_idx_labels",
    "synthetic_blobs",
    "partition_noniid",
    "partition_iid",
    "Mlp",
    "mlp_param_count",
    "select_devices",
    "local_update",
    "apply_aggregate",
    "evaluate",
]
