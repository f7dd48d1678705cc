# Input: ModelParams, DevicePartition, SgdConfig, RngStream, Mlp
# Output: device selection, local updates, aggregated model, accuracy
# Pos: FedAvg device-side and server-side steps
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
联邦训练步骤

- select_devices: 每轮均匀无放回选择 K 个设备
- local_update: E 个 epoch 的小批量 SGD，返回 Δθ_k = θ_k − θ
- apply_aggregate: θ ← θ + Δθ̂
- evaluate: argmax 准确率
"""

import numpy as np
import numpy.typing as npt

from src.config.models import SgdConfig
from src.fedcore.model import Mlp
from src.models import Dataset, DevicePartition, ModelParams, RealVector, TrainingDivergedError
from src.numcore.rng import RngStream


def select_devices(rng: RngStream, K_total: int, K: int) -> npt.NDArray[np.int64]:
    """
    均匀无放回选择 K 个设备（升序）

    Raises:
        ValueError: K > K_total 或 K < 1
    """
    if K < 1 or K > K_total:
        raise ValueError(f"参与设备数非法: K={K} K_total={K_total}")
    return rng.subset(K_total, K)


def local_update(
    theta: ModelParams,
    part: DevicePartition,
    cfg: SgdConfig,
    rng: RngStream,
    *,
    model: Mlp,
) -> RealVector:
    """
    本地小批量 SGD

    Args:
        theta: 本轮广播的全局模型
        part: 设备本地数据
        cfg: SGD 配置
        rng: 设备随机流（每个 epoch 重新打乱样本顺序）
        model: 模型结构

    Returns:
        Δθ_k

    Raises:
        ValueError: 模型维度不匹配或本地数据为空
        TrainingDivergedError: 损失或参数出现 NaN/Inf
    """
    if theta.dim != model.dim:
        raise ValueError(f"模型维度不匹配: theta={theta.dim} model={model.dim}")
    n = len(part)
    if n == 0:
        raise ValueError(f"设备 {part.device_id} 没有本地数据")

    w = theta.theta.copy()
    for epoch in range(cfg.local_epochs):
        # æ¯ä¸ª epoch éæ°æä¹±
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grad = model.loss_and_grad(w, part.features[idx], part.labels[idx])
            # åæ£å³ç»æ­¢æ¬è½®
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise TrainingDivergedError(
                    f"本地训练发散: device={part.device_id} epoch={epoch} loss={loss}"
                )
            w -= cfg.lr * grad
    # ä¸ä¼ çæ¯å¢éèéæ¨¡å
    return w - theta.theta


def apply_aggregate(theta: ModelParams, delta_hat: RealVector) -> ModelParams:
    """θ^{t+1} = θ^t + Δθ̂"""
    delta_hat = np.asarray(delta_hat, dtype=np.float64)
    if delta_hat.shape != theta.theta.shape:
        raise ValueError(f"聚合更新维度不匹配: {delta_hat.shape} != {theta.theta.shape}")
    return ModelParams(theta.theta + delta_hat)


def evaluate(theta: ModelParams, testset: Dataset, *, model: Mlp) -> float:
    """验证集准确率"""
    if len(testset) == 0:
        raise ValueError("验证集为空")
    predicted = model.predict(theta.theta, testset.features)
    return float(np.mean(predicted == testset.labels))
