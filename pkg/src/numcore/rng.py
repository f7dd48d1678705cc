# Input: master seed and text label
# Output: deterministic labelled random streams
# Pos: numcore randomness source shared by every module
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
随机流模块

职责：
- 由 (master_seed, label) 确定性地派生独立随机流
- 提供均匀实数、标准正态、复高斯 CN(0, σ²) 与无放回整数子集抽样

同一 (master_seed, label) 产生完全相同的抽样序列；不同 label 的流统计独立。
RngStream 为单一所有者对象，不在并发任务间共享；并发任务各自使用带标签的新流。
"""

import hashlib
from typing import Optional

import numpy as np
import numpy.typing as npt

_MAX_SEED = 2**64


def _label_key(label: str) -> int:
    """将文本标签映射为 64 位整数（稳定哈希，与 PYTHONHASHSEED 无关）"""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """带标签的确定性随机流"""

    def __init__(self, master_seed: int, label: str):
        """
        初始化随机流

        Args:
            master_seed: 64 位非负整数主种子
            label: 流标签（如 "channel/3"）
        """
        if not 0 <= int(master_seed) < _MAX_SEED:
            raise ValueError(f"master_seed 必须是 64 位非负整数: {master_seed}")
        self.master_seed = int(master_seed)
        self.label = label
        self.counter = 0
        seq = np.random.SeedSequence([self.master_seed, _label_key(label)])
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, label={self.label!r}, counter={self.counter})"

    def _advance(self, size: Optional[int | tuple[int, ...]]) -> None:
        if size is None:
            self.counter += 1
        else:
            self.counter += int(np.prod(size))

    def uniform(self, size: Optional[int | tuple[int, ...]] = None):
        """[0, 1) 均匀实数"""
        self._advance(size)
        return self._gen.random(size)

    def normal(self, size: Optional[int | tuple[int, ...]] = None, scale: float = 1.0):
        """N(0, scale²) 实数"""
        self._advance(size)
        return self._gen.normal(0.0, scale, size)

    def complex_normal(self, size: int, variance: float = 1.0) -> npt.NDArray[np.complex128]:
        """CN(0, variance)：实部与虚部各自独立 N(0, variance/2)"""
        if variance < 0:
            raise ValueError(f"方差不能为负: {variance}")
        scale = np.sqrt(variance / 2.0)
        self._advance(2 * size)
        re = self._gen.normal(0.0, 1.0, size)
        im = self._gen.normal(0.0, 1.0, size)
        return (re + 1j * im) * scale

    def subset(self, n: int, k: int) -> npt.NDArray[np.int64]:
        """从 [0, n) 无放回均匀抽取 k 个不同整数，升序返回"""
        if not 0 <= k <= n:
            raise ValueError(f"子集大小越界: k={k} n={n}")
        self._advance(k)
        picked = self._gen.choice(n, size=k, replace=False)
        return np.sort(picked.astype(np.int64))

    def permutation(self, n: int) -> npt.NDArray[np.int64]:
        """[0, n) 的随机排列"""
        self._advance(n)
        return self._gen.permutation(n).astype(np.int64)

    def child(self, sublabel: str) -> "RngStream":
        """派生子流：label/sublabel"""
        return RngStream(self.master_seed, f"{self.label}/{sublabel}")


def rng_stream(master_seed: int, label: str) -> RngStream:
    """创建 (master_seed, label) 对应的确定性随机流"""
    return RngStream(master_seed, label)
