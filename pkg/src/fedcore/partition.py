# Input: Dataset, device counts, RngStream
# Output: DevicePartition list with weights w_k = |D_k|/|D| (single-label shards)
# Pos: non-IID label-shard and IID data partitioning
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
数据划分模块

非 IID：按标签排序后在每个类别内部切成连续分片（共 K_total·shards_per_device 片），
每个设备随机分得 shards_per_device 个分片（每设备至多 shards_per_device 个类别）。
"""

import numpy as np

from src.models import Dataset, DevicePartition
from src.numcore.rng import RngStream
from src.utils.logger import log_event


def _build(dataset: Dataset, groups: list[np.ndarray]) -> list[DevicePartition]:
    total = len(dataset)
    return [
        DevicePartition(
            device_id=k,
            features=dataset.features[idx],
            labels=dataset.labels[idx],
            weight=idx.size / total,
        )
        for k, idx in enumerate(groups)
    ]


def _class_quotas(counts: np.ndarray, shard_count: int) -> np.ndarray:
    """
    为每个类别分配分片数 q_c（Σ q_c = shard_count，每个类别至少 1 片）

    先取 floor(n_c / s)，再按当前分片大小 n_c / q_c 逐片增减：
    补片给分片最大的类别，减片从减后分片最小的类别。
    """
    shard_size = counts.sum() / shard_count
    quotas = np.maximum(1, np.floor(counts / shard_size)).astype(np.int64)
    while quotas.sum() < shard_count:
        quotas[int(np.argmax(counts / quotas))] += 1
    while quotas.sum() > shard_count:
        # 只有 q_c > 1 的类别可以减片
        after = np.where(quotas > 1, counts / np.maximum(quotas - 1, 1), np.inf)
        quotas[int(np.argmin(after))] -= 1
    return quotas


def partition_noniid(
    dataset: Dataset,
    K_total: int,
    shards_per_device: int,
    rng: RngStream,
) -> list[DevicePartition]:
    """
    非 IID 标签分片划分

    分片在类别内部切分，每个分片只含一个类别，因此每个设备至多
    shards_per_device 个类别。类别样本数是分片大小的整数倍时各设备样本数相等；
    否则（如真实 MNIST）同一类别的分片大小相差至多 1，不同类别的分片大小略有差异。

    Args:
        dataset: 训练集
        K_total: 设备总数
        shards_per_device: 每设备分片数
        rng: 随机流（通常为 (seed, "partition")）

    Raises:
        ValueError: 样本数不能整除分片数，或类别数多于分片数
    """
    if K_total < 1 or shards_per_device < 1:
        raise ValueError(f"划分参数非法: K_total={K_total} shards_per_device={shards_per_device}")
    n = len(dataset)
    shard_count = K_total * shards_per_device
    if n == 0 or n % shard_count != 0:
        raise ValueError(f"样本数 {n} 不能整除分片数 K_total·shards={shard_count}")

    order = np.argsort(dataset.labels, kind="stable")
    classes, counts = np.unique(dataset.labels[order], return_counts=True)
    if classes.size > shard_count:
        raise ValueError(f"类别数 {classes.size} 多于分片数 {shard_count}，无法保证分片内单一类别")

    # 按类别切分：每个类别内部连续、尽量等大
    quotas = _class_quotas(counts, shard_count)
    shards: list[np.ndarray] = []
    for block, quota in zip(np.split(order, np.cumsum(counts)[:-1]), quotas):
        shards.extend(np.array_split(block, int(quota)))

    sizes = np.array([s.size for s in shards])
    if sizes.min() != sizes.max():
        log_event("partition", shards=shard_count, shard_min=int(sizes.min()), shard_max=int(sizes.max()))

    dealt = rng.permutation(shard_count)
    groups = [
        np.concatenate([shards[s] for s in dealt[k * shards_per_device:(k + 1) * shards_per_device]])
        for k in range(K_total)
    ]
    return _build(dataset, groups)


def partition_iid(dataset: Dataset, K_total: int, rng: RngStream) -> list[DevicePartition]:
    """IID 均匀随机划分（对照实验用）"""
    n = len(dataset)
    if K_total < 1 or n == 0 or n % K_total != 0:
        raise ValueError(f"样本数 {n} 不能整除设备数 K_total={K_total}")
    return _build(dataset, list(np.split(rng.permutation(n), K_total)))
