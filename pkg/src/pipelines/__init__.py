# Input: designs and metrics modules
# Output: pipelines exports
# Pos: pipelines package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
通信设计流水线模块

导出：
- transmit_aggregate, run_round, RoundContext, TransmitResult: 四种设计与轮次流水线
- agg_nmse, update_histogram, Histogram, symmetric_edges, dump_histogram_snapshot: 指标
"""

from src.pipelines.designs import RoundContext, TransmitResult, run_round, transmit_aggregate
from src.pipelines.metrics import (
    Histogram,
    agg_nmse,
    dump_histogram_snapshot,
    symmetric_edges,
    update_histogram,
)

__all__ = [
    "RoundContext",
    "TransmitResult",
    "run_round",
    "transmit_aggregate",
    "Histogram",
    "agg_nmse",
    "dump_histogram_snapshot",
    "symmetric_edges",
    "update_histogram",
]
