# Input: layer sizes, loss kind, flat parameter vector, mini-batch
# Output: logits, loss, flat gradient, predictions
# Pos: numpy multilayer perceptron used as the federated model
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
多层感知机模块

参数以扁平向量 θ ∈ R^d 存储，按层依次为 W_l（in×out，行主序）与 b_l（可选）。
隐藏层 ReLU，输出层线性；损失为 softmax 交叉熵或逐样本平方误差 Σ_j (o_j − t_j)²，均按批平均。
"""

from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from src.models import LossKind, ModelParams, RealVector
from src.numcore.rng import RngStream


def mlp_param_count(layers: Sequence[int], *, bias: bool = True) -> int:
    """参数总数：Σ in·out (+ out)"""
    if len(layers) < 2:
        raise ValueError(f"至少需要输入层与输出层: {list(layers)}")
    return sum(a * b + (b if bias else 0) for a, b in zip(layers[:-1], layers[1:]))


class Mlp:
    """扁平参数的多层感知机"""

    def __init__(
        self,
        layers: Sequence[int],
        *,
        bias: bool = True,
        loss: LossKind = LossKind.SOFTMAX_CE,
    ):
        """
        Args:
            layers: 各层宽度，如 [784, 26, 10]
            bias: 是否带偏置
            loss: 损失函数
        """
        if any(size < 1 for size in layers):
            raise ValueError(f"层宽必须为正: {list(layers)}")
        self.layers = [int(size) for size in layers]
        self.bias = bias
        self.loss_kind = loss
        self.dim = mlp_param_count(self.layers, bias=bias)

    def __repr__(self) -> str:
        return f"Mlp(layers={self.layers}, bias={self.bias}, loss={self.loss_kind.value}, d={self.dim})"

    # ============================================================
    # 参数布局
    # ============================================================

    def unpack(self, theta: RealVector) -> list[tuple[np.ndarray, Optional[np.ndarray]]]:
        """将扁平向量切分为 (W, b) 视图列表"""
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise ValueError(f"参数维度不匹配: {theta.shape} != ({self.dim},)")
        params = []
        offset = 0
        for fan_in, fan_out in zip(self.layers[:-1], self.layers[1:]):
            w = theta[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
            offset += fan_in * fan_out
            b = None
            if self.bias:
                b = theta[offset:offset + fan_out]
                offset += fan_out
            params.append((w, b))
        return params

    def init_params(self, rng: RngStream) -> ModelParams:
        """He 正态初始化权重，偏置置 0"""
        parts = []
        for fan_in, fan_out in zip(self.layers[:-1], self.layers[1:]):
            parts.append(np.asarray(rng.normal(fan_in * fan_out, scale=np.sqrt(2.0 / fan_in))))
            if self.bias:
                parts.append(np.zeros(fan_out))
        return ModelParams(np.concatenate(parts).astype(np.float64))

    # ============================================================
    # 前向 / 反向
    # ============================================================

    def forward(self, theta: RealVector, features: npt.NDArray[np.float64]) -> np.ndarray:
        """输出层 logits（n×out）"""
        out, _ = self._forward(self.unpack(theta), np.asarray(features, dtype=np.float64))
        return out

    def _forward(self, params, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        activations = [x]
        last = len(params) - 1
        for i, (w, b) in enumerate(params):
            z = activations[-1] @ w
            if b is not None:
                z = z + b
            activations.append(z if i == last else np.maximum(z, 0.0))
        return activations[-1], activations

    def _targets(self, labels: np.ndarray, width: int) -> np.ndarray:
        if self.loss_kind == LossKind.SQUARED and width == 1:
            return np.asarray(labels, dtype=np.float64).reshape(-1, 1)
        onehot = np.zeros((labels.size, width))
        onehot[np.arange(labels.size), np.asarray(labels, dtype=np.int64)] = 1.0
        return onehot

    def _loss_and_delta(self, out: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
        batch = out.shape[0]
        targets = self._targets(labels, out.shape[1])
        if self.loss_kind == LossKind.SOFTMAX_CE:
            shifted = out - out.max(axis=1, keepdims=True)
            log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
            log_prob = shifted - log_norm
            loss = float(-np.sum(targets * log_prob) / batch)
            delta = (np.exp(log_prob) - targets) / batch
        else:
            diff = out - targets
            loss = float(np.sum(diff**2) / batch)
            delta = 2.0 * diff / batch
        return loss, delta

    def loss(self, theta: RealVector, features: np.ndarray, labels: np.ndarray) -> float:
        out = self.forward(theta, features)
        return self._loss_and_delta(out, np.asarray(labels))[0]

    def loss_and_grad(
        self,
        theta: RealVector,
        features: np.ndarray,
        labels: np.ndarray,
    ) -> tuple[float, RealVector]:
        """
        批平均损失与扁平梯度

        Args:
            theta: 参数向量
            features: n×in 特征
            labels: 类别下标（平方损失且输出宽度为 1 时为实数目标）
        """
        params = self.unpack(theta)
        out, activations = self._forward(params, np.asarray(features, dtype=np.float64))
        loss, delta = self._loss_and_delta(out, np.asarray(labels))

        grads: list[np.ndarray] = []
        for i in range(len(params) - 1, -1, -1):
            w, b = params[i]
            layer_grads = [(activations[i].T @ delta).reshape(-1)]
            if b is not None:
                layer_grads.append(delta.sum(axis=0))
            grads = layer_grads + grads
            if i > 0:
                delta = (delta @ w.T) * (activations[i] > 0)
        return loss, np.concatenate(grads)

    def predict(self, theta: RealVector, features: np.ndarray) -> npt.NDArray[np.int64]:
        """argmax 预测（相等时取最小类别下标）"""
        return np.argmax(self.forward(theta, features), axis=1).astype(np.int64)
