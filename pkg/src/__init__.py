# Input: src.models enums and dataclasses
# Output: package re-exports
# Pos: src package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
ota-cs-fl: 空中计算联邦学习压缩感知仿真器
"""

from src.models import (
    # 枚举
    DesignKind,
    MaskMode,
    ThresholdMode,
    LossKind,
    PlotMode,
    # 数据结构
    Support,
    SparseApprox,
    ReducedVector,
    MeasurementMatrix,
    IhtResult,
    ChannelRound,
    TransmitReport,
    Dataset,
    DevicePartition,
    ModelParams,
    RoundMetrics,
    # 异常
    OperatorNormError,
    IhtDivergedError,
    PowerBudgetError,
    TrainingDivergedError,
    RoundFailedError,
)

__all__ = [
    # 枚举
    "DesignKind",
    "MaskMode",
    "ThresholdMode",
    "LossKind",
    "PlotMode",
    # 数据结构
    "Support",
    "SparseApprox",
    "ReducedVector",
    "MeasurementMatrix",
    "IhtResult",
    "ChannelRound",
    "TransmitReport",
    "Dataset",
    "DevicePartition",
    "ModelParams",
    "RoundMetrics",
    # 异常
    "OperatorNormError",
    "IhtDivergedError",
    "PowerBudgetError",
    "TrainingDivergedError",
    "RoundFailedError",
]
