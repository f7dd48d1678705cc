# Input: metrics CSV paths (or histogram snapshot files), plot mode, smoothing window
# Output: plot-ready pandas DataFrame / space-separated text table
# Pos: post-hoc plot data emission (rendering is left to external tools)
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
绘图数据模块

模式：
- vs_round：横轴为轮次
- vs_channel_uses：横轴为累计信道使用次数（由每轮 channel_uses 累加）
- histogram：合并直方图快照中的 truth / estimate 密度表

多个输入时按轮次对齐，输出 mean / min / max；单个输入时原样输出 accuracy。
"""

from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from src.models import CSV_COLUMNS, PlotMode


def read_metrics(path: Path) -> pd.DataFrame:
    """
    读取指标 CSV 并校验列结构

    Raises:
        ValueError: 列结构与 CSV_COLUMNS 不一致
    """
    df = pd.read_csv(path)
    if tuple(df.columns) != CSV_COLUMNS:
        raise ValueError(f"CSV 列结构不匹配: {path} columns={list(df.columns)}")
    return df


def _smoothed(acc: pd.Series, smooth: Optional[int]) -> pd.Series:
    if smooth is None or smooth <= 1:
        return acc
    return acc.rolling(window=smooth, min_periods=1).mean()


def _curves(paths: Sequence[Path], mode: PlotMode, smooth: Optional[int]) -> pd.DataFrame:
    frames = []
    for i, path in enumerate(paths):
        df = read_metrics(path)
        curve = pd.DataFrame({"round": df["round"]})
        curve[f"x{i}"] = df["channel_uses"].cumsum() if mode == PlotMode.VS_CHANNEL_USES else df["round"]
        curve[f"acc{i}"] = _smoothed(df["accuracy"].astype(float), smooth)
        frames.append(curve.set_index("round"))

    # æè½®æ¬¡å¯¹é½ï¼åªä¿çææç§å­é½æçè½®æ¬¡
    merged = pd.concat(frames, axis=1, join="inner").sort_index()
    x_name = "cum_channel_uses" if mode == PlotMode.VS_CHANNEL_USES else "round"
    acc = merged[[f"acc{i}" for i in range(len(paths))]]
    # æ¨ªè½´ååç§å­åå¼ï¼æè½®æ¬¡æ¶åç§å­ç¸åï¼
    x = merged[[f"x{i}" for i in range(len(paths))]].mean(axis=1)

    # åä¸ªç§å­ä¸è¾åº min/max
    if len(paths) == 1:
        out = pd.DataFrame({x_name: x, "accuracy": acc.iloc[:, 0]})
    else:
        out = pd.DataFrame({x_name: x, "mean": acc.mean(axis=1), "min": acc.min(axis=1), "max": acc.max(axis=1)})
    if x_name == "round" or (out[x_name] % 1 == 0).all():
        out[x_name] = out[x_name].astype("int64")
    return out.reset_index(drop=True)


def read_histogram(path: Path) -> pd.DataFrame:
    """读取直方图快照：返回 bin_center, truth, estimate 三列"""
    sections: dict[str, list[tuple[float, float]]] = {}
    current: Optional[str] = None
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# truth") or line.startswith("# estimate"):
            current = line.split()[1]
            sections[current] = []
        elif line.startswith("#") or not line.strip():
            continue
        elif current is not None:
            center, density = line.split()
            sections[current].append((float(center), float(density)))
    if set(sections) != {"truth", "estimate"}:
        raise ValueError(f"直方图快照格式错误: {path}")
    truth = pd.DataFrame(sections["truth"], columns=["bin_center", "truth"])
    estimate = pd.DataFrame(sections["estimate"], columns=["bin_center", "estimate"])
    return truth.merge(estimate, on="bin_center", how="outer")


def emit_plotdata(
    paths: Sequence[Path],
    mode: PlotMode | str,
    *,
    smooth: Optional[int] = None,
    out: Optional[Path] = None,
) -> pd.DataFrame:
    """
    生成绘图数据表

    Args:
        paths: 指标 CSV（histogram 模式下为快照文件）
        mode: vs_round / vs_channel_uses / histogram
        smooth: 移动平均窗口（仅作用于准确率）
        out: 输出文件（空格分隔文本）；None 时只返回 DataFrame

    Raises:
        ValueError: 无输入或列结构不匹配
    """
    mode = PlotMode(mode)
    if not paths:
        raise ValueError("emit_plotdata 至少需要一个输入文件")
    if mode == PlotMode.HISTOGRAM:
        tables = [read_histogram(p) for p in paths]
        # å¤ä¸ªå¿«ç§æ bin ä¸­å¿åå¹³å
        table = tables[0] if len(tables) == 1 else (
            pd.concat(tables).groupby("bin_center", as_index=False).mean()
        )
    else:
        table = _curves(paths, mode, smooth)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out, sep=" ", index=False, lineterminator="\n")
    return table
