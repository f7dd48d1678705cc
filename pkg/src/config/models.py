# Input: raw config values
# Output: pydantic config models (ExperimentConfig and derived views)
# Pos: config schema definitions
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
配置模型定义（pydantic）

职责：
- 定义配置结构的类型验证与默认值
- 扁平 ExperimentConfig（拒绝未知键），跨字段约束在 model_validator 中检查
- 派生视图：DesignSpec / SgdConfig / IhtConfig
"""

import math
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, model_validator

from src.models import DesignKind, LossKind, MaskMode, ThresholdMode


# ============================================================
# 子配置模型
# ============================================================

class IhtConfig(BaseModel):
    """IHT 配置"""
    model_config = ConfigDict(frozen=True)

    sparsity_l: int = Field(ge=1, description="稀疏度 L")
    epsilon: Optional[float] = Field(
        default=None,
        gt=0,
        description="迭代变化平方阈值 ε（None = 1e-8·max(1, ‖y‖²)）",
    )
    max_iters: int = Field(default=500, ge=1, description="最大迭代次数")


class SgdConfig(BaseModel):
    """本地 SGD 配置"""
    model_config = ConfigDict(frozen=True)

    # lr=0 仅用于退化检查（零更新）；实验配置要求 lr > 0
    lr: float = Field(default=0.01, ge=0, description="学习率 α")
    batch_size: int = Field(default=100, ge=1, description="批大小 B")
    local_epochs: int = Field(default=1, ge=1, description="本地轮数 E")


class DesignSpec(BaseModel):
    """通信设计"""
    model_config = ConfigDict(frozen=True)

    kind: DesignKind
    sparsity_l: int = Field(default=500, ge=1, description="稀疏度 L（case 2-4）")
    compressed_m: int = Field(default=1000, ge=1, description="压缩长度 M（case 3-4）")
    mask_mode: Optional[MaskMode] = Field(default=None, description="掩码模式（None 取设计默认值）")
    iht: Optional[IhtConfig] = None
    matrix_c: float = Field(default=1.01, gt=1, description="矩阵归一化常数 c")
    matrix_per_round: bool = False
    case2_debias: bool = False

    @model_validator(mode="after")
    def _check_mask(self) -> "DesignSpec":
        if self.kind == DesignKind.CASE2_SPARSE_REDUCED and self.mask_mode == MaskMode.TOP_L_PER_DEVICE:
            raise ValueError("mask_mode=top_l_per_device 仅适用于 case3（case2 需要所有设备相同的掩码）")
        return self

    @property
    def uses_matrix(self) -> bool:
        return self.kind in (DesignKind.CASE3_SPARSE_COMPRESSED, DesignKind.CASE4_COMPRESSED_ONLY)

    @property
    def effective_mask_mode(self) -> Optional[MaskMode]:
        """case2 默认均匀相同掩码，case3 默认每设备 top-L；其它设计不使用掩码"""
        if self.kind == DesignKind.CASE2_SPARSE_REDUCED:
            return self.mask_mode or MaskMode.UNIFORM_IDENTICAL
        if self.kind == DesignKind.CASE3_SPARSE_COMPRESSED:
            return self.mask_mode or MaskMode.TOP_L_PER_DEVICE
        return None

    def iht_config(self) -> IhtConfig:
        return self.iht or IhtConfig(sparsity_l=self.sparsity_l)

    def channel_uses(self, baseband_dim: int) -> int:
        """每轮信道使用次数：N / L / M / M"""
        if self.kind == DesignKind.CASE1_UNCOMPRESSED:
            return baseband_dim
        if self.kind == DesignKind.CASE2_SPARSE_REDUCED:
            return self.sparsity_l
        return self.compressed_m

    def rule_of_thumb_violated(self) -> bool:
        """压缩设计建议 M > L"""
        return self.uses_matrix and self.compressed_m <= self.sparsity_l


class ChannelConfig(BaseModel):
    """设备参与与信道参数"""
    model_config = ConfigDict(frozen=True)

    k_total: int = Field(default=100, ge=1)
    k_per_round: int = Field(default=10, ge=1)
    p_tot: float = Field(default=1000.0, gt=0)
    sigma2: float = Field(default=1.0, ge=0)
    h_th: float = Field(default=0.01, ge=0)
    h_th_mode: ThresholdMode = ThresholdMode.MAGNITUDE
    truncation_reweight: bool = False


# ============================================================
# 实验配置（扁平）
# ============================================================

class ExperimentConfig(BaseModel):
    """实验配置（扁平键值，未知键报错）"""
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    # 通信设计
    design: DesignKind = Field(default=DesignKind.CASE1_UNCOMPRESSED, description="通信设计")
    sparsity_l: int = Field(default=500, ge=1, description="稀疏度 L")
    compressed_m: int = Field(default=1000, ge=1, description="压缩长度 M")
    mask_mode: Optional[MaskMode] = Field(default=None, description="掩码模式")
    matrix_c: float = Field(default=1.01, gt=1, description="矩阵归一化常数 c（> 1）")
    matrix_per_round: bool = Field(default=False, description="每轮重新生成测量矩阵")
    matrix_file: Optional[Path] = Field(default=None, description="从 AFLM 二进制文件读取测量矩阵（替代生成）")
    matrix_dump: bool = Field(default=False, description="将实验级测量矩阵导出到 output_dir")
    iht_epsilon: Optional[float] = Field(default=None, gt=0, description="IHT 停止阈值 ε")
    iht_max_iters: int = Field(default=500, ge=1, description="IHT 最大迭代次数")
    case2_debias: bool = Field(default=False, description="case2 估计乘以 N/L")

    # 设备与信道
    k_total: int = Field(default=100, ge=1, description="设备总数 K_total")
    k_per_round: int = Field(default=10, ge=1, description="每轮参与设备数 K")
    p_tot: float = Field(default=1000.0, gt=0, description="总发送功率 P_tot")
    sigma2: float = Field(default=1.0, ge=0, description="噪声方差 σ²")
    h_th: float = Field(default=0.01, ge=0, description="截断门限 h_th")
    h_th_mode: ThresholdMode = Field(default=ThresholdMode.MAGNITUDE, description="门限作用于 |h| 或 |h|²")
    truncation_reweight: bool = Field(default=False, description="截断后对存活设备重新归一化权重")

    # 运行
    rounds: int = Field(default=400, ge=0, description="通信轮数 T")
    seeds: List[NonNegativeInt] = Field(default_factory=lambda: [0, 1, 2], min_length=1, description="随机种子列表（非负）")
    workers: int = Field(default=1, ge=1, description="并行种子任务数")

    # 模型
    model_layers: List[int] = Field(default_factory=lambda: [784, 26, 10], min_length=2)
    model_bias: bool = True
    model_loss: LossKind = LossKind.SOFTMAX_CE

    # 数据
    dataset: Literal["mnist", "synthetic"] = "mnist"
    mnist_dir: Optional[Path] = None
    train_subset: Optional[int] = Field(default=None, ge=1)
    test_subset: Optional[int] = Field(default=None, ge=1)
    synthetic_train: int = Field(default=2000, ge=1)
    synthetic_test: int = Field(default=500, ge=1)
    synthetic_features: int = Field(default=16, ge=1)
    synthetic_classes: int = Field(default=10, ge=2)
    synthetic_spread: float = Field(default=1.0, gt=0)
    partition: Literal["noniid", "iid"] = "noniid"
    shards_per_device: int = Field(default=2, ge=1)

    # SGD
    lr: float = Field(default=0.01, gt=0, description="学习率 α")
    batch_size: int = Field(default=100, ge=1, description="批大小 B")
    local_epochs: int = Field(default=1, ge=1, description="本地轮数 E")

    # 输出
    histogram_threshold: float = Field(default=0.5, ge=0, le=1, description="直方图快照的准确率门限")
    histogram_bins: int = Field(default=60, ge=1)
    output_dir: Path = Path("results")

    @model_validator(mode="after")
    def _check_cross_fields(self) -> "ExperimentConfig":
        if any(size < 1 for size in self.model_layers):
            raise ValueError(f"model_layers 每层必须为正: {self.model_layers}")
        if self.k_per_round > self.k_total:
            raise ValueError(f"k_per_round ({self.k_per_round}) 不能大于 k_total ({self.k_total})")
        if self.dataset == "synthetic":
            if self.model_layers[0] != self.synthetic_features:
                raise ValueError(
                    f"model_layers[0] ({self.model_layers[0]}) 必须等于 synthetic_features ({self.synthetic_features})"
                )
            if self.model_loss == LossKind.SOFTMAX_CE and self.model_layers[-1] != self.synthetic_classes:
                raise ValueError(
                    f"model_layers[-1] ({self.model_layers[-1]}) 必须等于 synthetic_classes ({self.synthetic_classes})"
                )
        n = self.baseband_dim
        if self.design != DesignKind.CASE1_UNCOMPRESSED and self.sparsity_l > n:
            raise ValueError(f"sparsity_l ({self.sparsity_l}) 不能大于 N ({n})")
        if self.design in (DesignKind.CASE3_SPARSE_COMPRESSED, DesignKind.CASE4_COMPRESSED_ONLY):
            if self.compressed_m >= n:
                raise ValueError(f"compressed_m ({self.compressed_m}) 必须小于 N ({n})")
        if self.matrix_per_round and (self.matrix_file is not None or self.matrix_dump):
            raise ValueError("matrix_file / matrix_dump 只适用于实验级固定矩阵（matrix_per_round=false）")
        # mask_mode 与设计的匹配在 DesignSpec 中检查
        self.design_spec()
        return self

    @property
    def model_dim(self) -> int:
        """模型参数维度 d"""
        from src.fedcore.model import mlp_param_count

        return mlp_param_count(self.model_layers, bias=self.model_bias)

    @property
    def baseband_dim(self) -> int:
        """基带维度 N = ceil(d/2)"""
        return math.ceil(self.model_dim / 2)

    def iht(self) -> IhtConfig:
        return IhtConfig(
            sparsity_l=self.sparsity_l,
            epsilon=self.iht_epsilon,
            max_iters=self.iht_max_iters,
        )

    def design_spec(self) -> DesignSpec:
        return DesignSpec(
            kind=self.design,
            sparsity_l=self.sparsity_l,
            compressed_m=self.compressed_m,
            mask_mode=self.mask_mode,
            iht=self.iht(),
            matrix_c=self.matrix_c,
            matrix_per_round=self.matrix_per_round,
            case2_debias=self.case2_debias,
        )

    def sgd(self) -> SgdConfig:
        return SgdConfig(lr=self.lr, batch_size=self.batch_size, local_epochs=self.local_epochs)

    def channel(self) -> ChannelConfig:
        return ChannelConfig(
            k_total=self.k_total,
            k_per_round=self.k_per_round,
            p_tot=self.p_tot,
            sigma2=self.sigma2,
            h_th=self.h_th,
            h_th_mode=self.h_th_mode,
            truncation_reweight=self.truncation_reweight,
        )
