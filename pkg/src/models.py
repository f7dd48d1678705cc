# Input: none
# Output: shared enums, dataclasses and error types for module contracts
# Pos: core data contracts between numcore/sparsify/linmap/iht/airchan/fedcore/pipelines/runner
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
核心数据结构定义

模块间通过这些数据结构传递信息，不直接访问内部状态。
向量一律使用 numpy 数组：实数模型更新为 float64，基带信号为 complex128。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import numpy.typing as npt


# ============================================================
# 向量别名
# ============================================================

RealVector = npt.NDArray[np.float64]
BasebandVector = npt.NDArray[np.complex128]
IndexArray = npt.NDArray[np.int64]


# ============================================================
# 枚举类型
# ============================================================

class DesignKind(str, Enum):
    """通信设计（四种方案）"""
    CASE1_UNCOMPRESSED = "case1_uncompressed"
    CASE2_SPARSE_REDUCED = "case2_sparse_reduced"
    CASE3_SPARSE_COMPRESSED = "case3_sparse_compressed"
    CASE4_COMPRESSED_ONLY = "case4_compressed_only"


class MaskMode(str, Enum):
    """稀疏化掩码模式"""
    UNIFORM_IDENTICAL = "uniform_identical"  # 所有设备共用的均匀随机掩码
    TOP_L_PER_DEVICE = "top_l_per_device"    # 每个设备各自 top-L（仅 case3）
    TOP_L_ORACLE = "top_l_oracle"            # 真实聚合量的 top-L，仿真器专用


class ThresholdMode(str, Enum):
    """截断门限作用对象"""
    MAGNITUDE = "magnitude"  # |h_k| >= h_th
    POWER = "power"          # |h_k|^2 >= h_th


class LossKind(str, Enum):
    """本地损失函数"""
    SOFTMAX_CE = "softmax_ce"
    SQUARED = "squared"


class PlotMode(str, Enum):
    """绘图数据模式"""
    VS_ROUND = "vs_round"
    VS_CHANNEL_USES = "vs_channel_uses"
    HISTOGRAM = "histogram"


# ============================================================
# 稀疏表示
# ============================================================

@dataclass(frozen=True, eq=False)
class Support:
    """
    支撑集：严格递增的下标序列

    indices 为只读 int64 数组，ambient_dim 为所在空间维度 N。
    """
    indices: IndexArray
    ambient_dim: int

    def __post_init__(self) -> None:
        idx = np.array(self.indices, dtype=np.int64).reshape(-1)
        if self.ambient_dim < 0:
            raise ValueError(f"ambient_dim 不能为负: {self.ambient_dim}")
        if idx.size > 0:
            if np.any(np.diff(idx) <= 0):
                raise ValueError("支撑集下标必须严格递增且无重复")
            if idx[0] < 0 or idx[-1] >= self.ambient_dim:
                raise ValueError(
                    f"支撑集下标越界: range=[{idx[0]}, {idx[-1]}] ambient_dim={self.ambient_dim}"
                )
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_indices(cls, indices, ambient_dim: int) -> "Support":
        """由任意顺序的不重复下标构造（内部排序）"""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if np.unique(idx).size != idx.size:
            raise ValueError("支撑集下标存在重复")
        return cls(np.sort(idx), ambient_dim)

    @classmethod
    def full(cls, ambient_dim: int) -> "Support":
        return cls(np.arange(ambient_dim, dtype=np.int64), ambient_dim)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __contains__(self, item: object) -> bool:
        if not isinstance(item, (int, np.integer)):
            return False
        pos = int(np.searchsorted(self.indices, item))
        return pos < self.indices.size and int(self.indices[pos]) == int(item)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Support):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and np.array_equal(self.indices, other.indices)

    def to_list(self) -> list[int]:
        return [int(i) for i in self.indices]

    def to_text(self) -> str:
        """序列化为有序下标列表（用于实验日志）"""
        return " ".join(str(i) for i in self.to_list())


@dataclass(frozen=True, eq=False)
class SparseApprox:
    """稀疏近似：全长向量 + 显式支撑集（支撑集外为 0）"""
    dense: BasebandVector
    support: Support

    def __post_init__(self) -> None:
        if self.dense.shape != (self.support.ambient_dim,):
            raise ValueError(
                f"dense 长度 {self.dense.shape} 与支撑集维度 {self.support.ambient_dim} 不一致"
            )

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.dense))


@dataclass(frozen=True, eq=False)
class ReducedVector:
    """降维向量：仅保留支撑集上的 L 个元素"""
    values: BasebandVector
    support: Support

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.support),):
            raise ValueError(
                f"values 长度 {self.values.shape} 与支撑集大小 {len(self.support)} 不一致"
            )


# ============================================================
# 线性压缩 / 重构
# ============================================================

@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """
    测量矩阵 A（实数 M×N）

    op_norm_bound 为经过幂迭代认证的算子范数上界（< 1）。
    """
    entries: npt.NDArray[np.float64]
    op_norm_bound: float
    seed_label: str = ""

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n(self) -> int:
        return int(self.entries.shape[1])


@dataclass(frozen=True)
class IhtResult:
    """IHT 重构结果"""
    estimate: SparseApprox
    iterations: int
    converged: bool
    final_residual: float  # ||y - A x||_2^2


# ============================================================
# 信道
# ============================================================

@dataclass(frozen=True, eq=False)
class ChannelRound:
    """
    单轮信道状态

    gains 与 active_set 对齐到本轮被选中的设备顺序（active_set 为其中的位置下标）。
    """
    gains: npt.NDArray[np.complex128]
    active_set: IndexArray
    eta: float
    noise_var: float
    total_power: float
    symbol_count: int


@dataclass(frozen=True, eq=False)
class TransmitReport:
    """发送能量报告：每个设备 ||psi_k(s_k)||^2 与预算 P_tot"""
    per_device_energy: npt.NDArray[np.float64]
    budget: float

    @property
    def max_energy(self) -> float:
        if self.per_device_energy.size == 0:
            return 0.0
        return float(np.max(self.per_device_energy))


# ============================================================
# 联邦学习
# ============================================================

@dataclass(frozen=True, eq=False)
class Dataset:
    """样本集合：features (n×f, float64)，labels (n, int64 或 float64 目标)"""
    features: npt.NDArray[np.float64]
    labels: npt.NDArray

    def __post_init__(self) -> None:
        if self.features.ndim != 2:
            raise ValueError(f"features 必须为二维数组: shape={self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError(
                f"labels 数量 {self.labels.shape} 与样本数 {self.features.shape[0]} 不一致"
            )

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def subset(self, count: Optional[int]) -> "Dataset":
        """取前 count 个样本（None 表示全部）"""
        if count is None or count >= len(self):
            return self
        return Dataset(self.features[:count], self.labels[:count])


@dataclass(frozen=True, eq=False)
class DevicePartition:
    """设备本地数据与权重 w_k = |D_k| / |D|"""
    device_id: int
    features: npt.NDArray[np.float64]
    labels: npt.NDArray
    weight: float

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def distinct_labels(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """全局模型参数 theta ∈ R^d"""
    theta: RealVector

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("模型参数包含 NaN/Inf")

    @property
    def dim(self) -> int:
        return int(self.theta.size)


# ============================================================
# 轮次指标
# ============================================================

CSV_COLUMNS = (
    "round",
    "channel_uses",
    "cum_channel_uses",
    "accuracy",
    "agg_nmse",
    "eta",
    "iht_iters",
    "converged",
    "skipped",
    "seed",
)


@dataclass(frozen=True, eq=False)
class RoundMetrics:
    """
    单轮指标（每轮一行 CSV）

    device_ids 与 per_device_energy 对齐到本轮实际发送的设备。
    """
    round: int
    channel_uses: int
    test_accuracy: float
    agg_nmse: float
    eta: float
    iht_iterations: Optional[int] = None
    converged: Optional[bool] = None
    skipped: bool = False
    seed: int = 0
    active_devices: int = 0
    device_ids: IndexArray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    per_device_energy: npt.NDArray[np.float64] = field(
        default_factory=lambda: np.zeros(0, dtype=np.float64)
    )

    def as_csv_row(self, cum_channel_uses: int) -> list[str]:
        """按 CSV_COLUMNS 顺序输出字符串字段"""
        return [
            str(self.round),
            str(self.channel_uses),
            str(cum_channel_uses),
            repr(float(self.test_accuracy)),
            repr(float(self.agg_nmse)),
            repr(float(self.eta)),
            "" if self.iht_iterations is None else str(self.iht_iterations),
            "" if self.converged is None else str(int(self.converged)),
            str(int(self.skipped)),
            str(self.seed),
        ]


# ============================================================
# 异常
# ============================================================

class OperatorNormError(RuntimeError):
    """幂迭代在最大迭代次数内未收敛"""

    def __init__(self, message: str, *, last_estimate: float, iterations: int):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.iterations = iterations


class IhtDivergedError(RuntimeError):
    """IHT 迭代出现 NaN/Inf"""

    def __init__(self, message: str, *, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class PowerBudgetError(RuntimeError):
    """设备发送能量超过 P_tot（eta 计算错误）"""

    def __init__(self, message: str, *, device: int, energy: float, budget: float):
        super().__init__(message)
        self.device = device
        self.energy = energy
        self.budget = budget


class TrainingDivergedError(RuntimeError):
    """本地 SGD 出现 NaN 损失"""


class RoundFailedError(RuntimeError):
    """某一轮流水线失败（携带轮次与种子）"""

    def __init__(self, message: str, *, round_index: int, seed: int):
        super().__init__(message)
        self.round_index = round_index
        self.seed = seed
