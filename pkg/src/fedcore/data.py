# Input: MNIST IDX files (optionally .gz) or synthetic-blob parameters
# Output: train/test Dataset objects
# Pos: dataset ingestion for federated training
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
数据集模块

职责：
- 解析 MNIST IDX 文件（大端 magic：图像 0x00000803，标签 0x00000801），像素缩放到 [0,1]
- 生成合成高斯团数据集（无需外部数据的测试与桌面实验）
"""

import gzip
import struct
from pathlib import Path
from typing import BinaryIO, Optional

import numpy as np
import numpy.typing as npt

from src.models import Dataset
from src.numcore.rng import RngStream
from src.utils.logger import log_event

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def _open_idx(path: Path) -> BinaryIO:
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _resolve(directory: Path, name: str) -> Path:
    for candidate in (directory / name, directory / f"{name}.gz"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"MNIST 文件不存在: {directory / name}[.gz]")


def read_idx_images(path: Path) -> npt.NDArray[np.float64]:
    """
    读取 IDX 图像文件

    Returns:
        (count, rows*cols) 的 float64 数组，取值 [0, 1]
    """
    with _open_idx(path) as f:
        header = f.read(16)
        if len(header) != 16:
            raise ValueError(f"IDX 图像文件头不完整: {path}")
        # å¤§ç«¯ï¼magic, æ°é, è¡, å
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGE_MAGIC:
            raise ValueError(f"IDX 图像 magic 不匹配: {magic:#010x} ({path})")
        body = f.read()
    if len(body) != count * rows * cols:
        raise ValueError(f"IDX 图像数据长度不匹配: {len(body)} != {count * rows * cols}")
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(count, rows * cols)
    # åç´ å½ä¸åå° [0, 1]
    return pixels.astype(np.float64) / 255.0


def read_idx_labels(path: Path) -> npt.NDArray[np.int64]:
    """读取 IDX 标签文件"""
    with _open_idx(path) as f:
        header = f.read(8)
        if len(header) != 8:
            raise ValueError(f"IDX 标签文件头不完整: {path}")
        magic, count = struct.unpack(">II", header)
        if magic != IDX_LABEL_MAGIC:
            raise ValueError(f"IDX 标签 magic 不匹配: {magic:#010x} ({path})")
        body = f.read()
    if len(body) != count:
        raise ValueError(f"IDX 标签数据长度不匹配: {len(body)} != {count}")
    return np.frombuffer(body, dtype=np.uint8).astype(np.int64)


def load_mnist(
    directory: Path,
    *,
    train_subset: Optional[int] = None,
    test_subset: Optional[int] = None,
) -> tuple[Dataset, Dataset]:
    """
    加载 MNIST 训练集与验证集

    Args:
        directory: 存放四个 IDX 文件的目录
        train_subset: 仅取前 n 个训练样本
        test_subset: 仅取前 n 个验证样本
    """
    train = Dataset(
        read_idx_images(_resolve(directory, MNIST_FILES["train_images"])),
        read_idx_labels(_resolve(directory, MNIST_FILES["train_labels"])),
    ).subset(train_subset)
    test = Dataset(
        read_idx_images(_resolve(directory, MNIST_FILES["test_images"])),
        read_idx_labels(_resolve(directory, MNIST_FILES["test_labels"])),
    ).subset(test_subset)
    log_event("dataset", source="mnist", dir=str(directory), train=len(train), test=len(test))
    return train, test


def synthetic_blobs(
    rng: RngStream,
    *,
    n_train: int,
    n_test: int,
    features: int = 16,
    classes: int = 10,
    spread: float = 1.0,
    center_scale: float = 3.0,
) -> tuple[Dataset, Dataset]:
    """
    合成高斯团数据集（各类样本数均衡，训练/验证共享类中心）

    Args:
        rng: 随机流（通常为 (seed, "data")）
        n_train: 训练样本数
        n_test: 验证样本数
        features: 特征维度
        classes: 类别数
        spread: 类内标准差
        center_scale: 类中心标准差
    """
    if classes < 2 or features < 1:
        raise ValueError(f"合成数据参数非法: classes={classes} features={features}")
    centers = np.asarray(rng.normal((classes, features), scale=center_scale))

    def _draw(n: int) -> Dataset:
        # åç±»æ ·æ¬æ°ç¸åï¼é¡ºåºæä¹±
        labels = np.arange(n, dtype=np.int64) % classes
        labels = labels[rng.permutation(n)]
        noise = np.asarray(rng.normal((n, features), scale=spread))
        return Dataset(centers[labels] + noise, labels)

    train = _draw(n_train)
    test = _draw(n_test)
    log_event("dataset", source="synthetic", train=n_train, test=n_test, features=features, classes=classes)
    return train, test
