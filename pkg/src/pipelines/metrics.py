# Input: true and estimated aggregate updates, bin edges
# Output: aggregation NMSE, histogram counts with explicit zero mass, density tables
# Pos: aggregation-quality metrics computed by the simulator harness
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
聚合质量指标

这些指标使用真实聚合量 Σ w_k Δθ_k，仅在仿真框架中计算，PS 侧流程不可见。
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import numpy.typing as npt

from src.models import RealVector
from src.utils.helpers import squared_norm


def agg_nmse(truth: RealVector, estimate: RealVector) -> float:
    """
    ‖estimate − truth‖² / ‖truth‖²

    Raises:
        ValueError: 维度不一致或 truth 为零向量
    """
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    if truth.shape != estimate.shape:
        raise ValueError(f"agg_nmse 维度不一致: {truth.shape} != {estimate.shape}")
    energy = squared_norm(truth)
    if energy == 0:
        raise ValueError("agg_nmse 的真实聚合量为零向量")
    return squared_norm(estimate - truth) / energy


@dataclass(frozen=True, eq=False)
class Histogram:
    """直方图：非零值按箱计数，精确零单独计数"""
    edges: npt.NDArray[np.float64]
    counts: npt.NDArray[np.int64]
    zero_count: int
    total: int

    @property
    def zero_fraction(self) -> float:
        return self.zero_count / self.total if self.total else 0.0

    @property
    def centers(self) -> npt.NDArray[np.float64]:
        return (self.edges[:-1] + self.edges[1:]) / 2.0

    def density(self) -> npt.NDArray[np.float64]:
        """非零部分的概率密度（以全部样本数归一，零质量不计入）"""
        widths = np.diff(self.edges)
        if self.total == 0:
            return np.zeros_like(widths)
        return self.counts / (self.total * widths)


def update_histogram(values: RealVector, bin_edges: Sequence[float] | npt.NDArray[np.float64]) -> Histogram:
    """
    统计直方图

    Args:
        values: 待统计向量
        bin_edges: 单调递增的箱边界（末箱右闭）

    Returns:
        Histogram（精确零计入 zero_count，不进入任何箱）
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin_edges 必须单调递增且至少两个")
    # ç²¾ç¡®é¶åç¬è®¡æ°
    zero = values == 0
    counts, _ = np.histogram(values[~zero], bins=edges)
    return Histogram(edges=edges, counts=counts.astype(np.int64), zero_count=int(zero.sum()), total=values.size)


def symmetric_edges(vectors: Sequence[RealVector], bins: int) -> npt.NDArray[np.float64]:
    """覆盖所有向量取值的对称等宽箱边界"""
    peak = max((float(np.max(np.abs(v))) for v in vectors if np.size(v)), default=0.0)
    if peak == 0:
        peak = 1.0
    return np.linspace(-peak, peak, bins + 1)


def dump_histogram_snapshot(
    path: Path,
    truth: RealVector,
    estimate: RealVector,
    bins: int,
    *,
    round_index: int,
    accuracy: float,
) -> tuple[Histogram, Histogram]:
    """
    写出真实 / 估计聚合量的 (bin_center, density) 表与零质量比例
    """
    # ä¸¤å¼ è¡¨å±ç¨åä¸ç»ç®±è¾¹ç
    edges = symmetric_edges([truth, estimate], bins)
    tables = {"truth": update_histogram(truth, edges), "estimate": update_histogram(estimate, edges)}
    lines = [f"# round={round_index} accuracy={accuracy!r}"]
    for name, hist in tables.items():
        lines.append(f"# {name} zero_mass={hist.zero_fraction!r}")
        lines.append("# bin_center density")
        lines.extend(f"{c!r} {p!r}" for c, p in zip(hist.centers.tolist(), hist.density().tolist()))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return tables["truth"], tables["estimate"]
