# Input: RngStream, matrix dimensions M/N, normalization constant c
# Output: MeasurementMatrix, certified operator norm, forward/adjoint maps, RIP probe, binary dump
# Pos: linear compression operator
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
测量矩阵模块

职责：
- 生成测量矩阵：A' 每列均匀取自 R^M 单位球面，A = A' / (c·||A'||_op)
- 幂迭代认证算子范数（不做稠密 SVD）
- 正向压缩 y = A s 与伴随 A^T y（实矩阵分别作用于实部与虚部）
- 经验 RIP 探测与二进制导出（AFLM 头）
"""

import struct
from pathlib import Path

import numpy as np
import numpy.typing as npt

from src.models import BasebandVector, MeasurementMatrix, OperatorNormError
from src.numcore.rng import RngStream, rng_stream
from src.utils.logger import log_event

DUMP_MAGIC = b"AFLM"
_HEADER = struct.Struct("<4sII4x")  # magic, u32 M, u32 N, 4 字节保留 → 16 字节


def operator_norm(
    A: npt.NDArray[np.float64],
    *,
    rel_tol: float = 1e-10,
    max_iters: int = 10000,
    seed: int = 0,
) -> float:
    """
    幂迭代估计最大奇异值（作用于 A^T A，不显式构造 Gram 矩阵）

    Args:
        A: 实矩阵
        rel_tol: 相邻两次估计的相对变化阈值
        max_iters: 最大迭代次数
        seed: 起始向量的固定种子

    Returns:
        ||A||_op

    Raises:
        ValueError: 零矩阵
        OperatorNormError: 未在 max_iters 内收敛（携带最后一次估计）
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.size == 0 or not np.any(A):
        raise ValueError("operator_norm 需要非零二维矩阵")

    rng = rng_stream(seed, "operator_norm")
    v = rng.normal(A.shape[1])
    v /= np.linalg.norm(v)

    sigma_prev = 0.0
    sigma = 0.0
    for iteration in range(1, max_iters + 1):
        w = A @ v
        sigma = float(np.linalg.norm(w))  # sqrt(v^T A^T A v)
        u = A.T @ w
        u_norm = float(np.linalg.norm(u))
        if u_norm == 0.0:
            # 起始向量落入零空间，换一个方向
            v = rng.normal(A.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = u / u_norm
        if iteration > 1 and abs(sigma - sigma_prev) <= rel_tol * sigma:
            return sigma
        sigma_prev = sigma

    raise OperatorNormError(
        f"幂迭代未收敛: iterations={max_iters} last_estimate={sigma}",
        last_estimate=sigma,
        iterations=max_iters,
    )


def hypersphere_columns(rng: RngStream, M: int, N: int) -> npt.NDArray[np.float64]:
    """A'：每列为 R^M 单位球面上的均匀样本（标准正态后归一化）"""
    raw = np.asarray(rng.normal((M, N)), dtype=np.float64)
    return raw / np.linalg.norm(raw, axis=0, keepdims=True)


def generate_matrix(rng: RngStream, M: int, N: int, c: float = 1.01) -> MeasurementMatrix:
    """
    生成测量矩阵

    Args:
        rng: 随机流（通常为 (seed, "matrix")）
        M: 压缩长度
        N: 原始长度
        c: 归一化常数（> 1），op_norm_bound = 1/c

    Returns:
        MeasurementMatrix
    """
    if M < 1 or M >= N:
        raise ValueError(f"测量矩阵需要 1 <= M < N: M={M} N={N}")
    if c <= 1.0:
        raise ValueError(f"归一化常数必须大于 1: c={c}")

    # åå½ä¸ååæ´ä½ç¼©æ¾å° âAâ = 1/c
    raw = hypersphere_columns(rng, M, N)
    raw_norm = operator_norm(raw)
    entries = raw / (c * raw_norm)
    log_event("matrix", label=rng.label, m=M, n=N, raw_op_norm=raw_norm, bound=1.0 / c, level="debug")
    return MeasurementMatrix(entries=entries, op_norm_bound=1.0 / c, seed_label=rng.label)


def compress(A: MeasurementMatrix, s: BasebandVector) -> BasebandVector:
    """y = A s（实部与虚部分别相乘，避免实矩阵被提升为复矩阵）"""
    s = np.asarray(s).reshape(-1)
    if s.size != A.n:
        raise ValueError(f"compress 维度不匹配: len(s)={s.size} N={A.n}")
    return A.entries @ s.real + 1j * (A.entries @ s.imag)


def adjoint(A: MeasurementMatrix, y: BasebandVector) -> BasebandVector:
    """A^H y = A^T y（A 为实矩阵）"""
    y = np.asarray(y).reshape(-1)
    if y.size != A.m:
        raise ValueError(f"adjoint 维度不匹配: len(y)={y.size} M={A.m}")
    return A.entries.T @ y.real + 1j * (A.entries.T @ y.imag)


def rip_probe(A: MeasurementMatrix, L: int, trials: int, rng: RngStream) -> float:
    """
    经验 RIP 探测：对随机 L 稀疏单位向量计算 max |‖As‖² − 1|

    Returns:
        δ̂（下界估计，非认证值）
    """
    if not 1 <= L <= A.n:
        raise ValueError(f"RIP 探测稀疏度越界: L={L} N={A.n}")
    delta = 0.0
    for _ in range(trials):
        support = rng.subset(A.n, L)
        x = np.asarray(rng.normal(L), dtype=np.float64)
        x /= np.linalg.norm(x)
        energy = float(np.sum((A.entries[:, support] @ x) ** 2))
        delta = max(delta, abs(energy - 1.0))
    log_event("rip", label=A.seed_label, sparsity=L, trials=trials, delta=delta)
    return delta


def dump_matrix(A: MeasurementMatrix, path: Path) -> None:
    """二进制导出：16 字节头（AFLM, u32 M, u32 N）+ 行优先小端 float64"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(DUMP_MAGIC, A.m, A.n))
        f.write(np.ascontiguousarray(A.entries, dtype="<f8").tobytes(order="C"))


def load_matrix(path: Path) -> MeasurementMatrix:
    """读取 dump_matrix 的输出并重新认证算子范数"""
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"矩阵文件头不完整: {path}")
        magic, m, n = _HEADER.unpack(header)
        if magic != DUMP_MAGIC:
            raise ValueError(f"矩阵文件 magic 不匹配: {magic!r}")
        body = f.read()
    expected = m * n * 8
    if len(body) != expected:
        raise ValueError(f"矩阵数据长度不匹配: {len(body)} != {expected}")
    entries = np.frombuffer(body, dtype="<f8").reshape(m, n).astype(np.float64)
    # å¤é¨ç©éµåæ ·è¦æ± âAâ < 1
    bound = operator_norm(entries)
    if bound >= 1.0:
        raise ValueError(f"导入矩阵算子范数不小于 1: {bound}")
    return MeasurementMatrix(entries=entries, op_norm_bound=bound, seed_label=str(path.name))
