# Input: none (fixed internal seeds)
# Output: list of SelftestCheck results; non-zero exit from CLI on failure
# Pos: fast acceptance subset runnable without external data
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
自检模块

快速检查：无噪声精确性、功率约束、IHT 穷举预言机一致性、信道使用计数。
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.config.models import ChannelConfig, DesignSpec, IhtConfig
from src.iht.solver import iht_reconstruct
from src.linmap.matrix import compress, generate_matrix
from src.models import DesignKind
from src.numcore.rng import rng_stream
from src.pipelines.designs import transmit_aggregate
from src.pipelines.metrics import agg_nmse
from src.utils.logger import log_event

SELFTEST_SEED = 20240501


@dataclass(frozen=True)
class SelftestCheck:
    name: str
    passed: bool
    detail: str


def _random_round(d: int, K: int, label: str):
    rng = rng_stream(SELFTEST_SEED, label)
    updates = [np.asarray(rng.normal(d)) for _ in range(K)]
    weights = np.full(K, 1.0 / K)
    gains = rng.complex_normal(K, 1.0)
    return updates, weights, gains


def check_noiseless_exactness() -> SelftestCheck:
    """case1，K=10，N=1000，σ²=0 ⇒ NMSE < 1e-20"""
    updates, weights, gains = _random_round(2000, 10, "noiseless")
    channel = ChannelConfig(sigma2=0.0, p_tot=1000.0)
    result = transmit_aggregate(
        DesignSpec(kind=DesignKind.CASE1_UNCOMPRESSED), updates, weights, gains, channel,
        noise_rng=rng_stream(SELFTEST_SEED, "noise"),
    )
    nmse = agg_nmse(weights @ np.stack(updates), result.estimate)
    return SelftestCheck("noiseless_exactness", nmse < 1e-20, f"nmse={nmse:.3e}")


def _design_results():
    updates, weights, gains = _random_round(400, 6, "designs")
    channel = ChannelConfig(sigma2=1.0, p_tot=1000.0)
    N = 200
    matrix = generate_matrix(rng_stream(SELFTEST_SEED, "matrix"), 50, N)
    for kind in DesignKind:
        design = DesignSpec(kind=kind, sparsity_l=20, compressed_m=50)
        result = transmit_aggregate(
            design, updates, weights, gains, channel,
            noise_rng=rng_stream(SELFTEST_SEED, f"noise/{kind.value}"),
            mask_rng=rng_stream(SELFTEST_SEED, f"mask/{kind.value}"),
            matrix=matrix if design.uses_matrix else None,
        )
        yield design, N, result


def check_power_budget() -> SelftestCheck:
    """每个设计：最大能量 ≤ P_tot(1+1e-9)，瓶颈设备恰好等于 P_tot"""
    worst = 0.0
    ok = True
    for design, _, result in _design_results():
        peak = result.report.max_energy
        rel = abs(peak - result.report.budget) / result.report.budget
        worst = max(worst, rel)
        # ä¸è¶é¢ç®ä¸ç¶é¢è®¾å¤ç¨æ»¡
        ok = ok and peak <= result.report.budget * (1 + 1e-9) and rel <= 1e-9
    return SelftestCheck("power_budget", ok, f"max_rel_gap={worst:.3e}")


def check_channel_accounting() -> SelftestCheck:
    """信道使用次数 {N, L, M, M}"""
    observed = {design.kind.value: result.channel_uses for design, _, result in _design_results()}
    expected = {
        DesignKind.CASE1_UNCOMPRESSED.value: 200,
        DesignKind.CASE2_SPARSE_REDUCED.value: 20,
        DesignKind.CASE3_SPARSE_COMPRESSED.value: 50,
        DesignKind.CASE4_COMPRESSED_ONLY.value: 50,
    }
    return SelftestCheck("channel_accounting", observed == expected, str(observed))


def oracle_one_sparse(entries: np.ndarray, y: np.ndarray) -> tuple[int, complex]:
    """穷举每个单元素支撑集的一维最小二乘，返回残差最小者"""
    best = (-1, 0j, math.inf)
    for j in range(entries.shape[1]):
        col = entries[:, j]
        coef = complex(np.dot(col, y) / np.dot(col, col))
        residual = float(np.linalg.norm(y - coef * col) ** 2)
        if residual < best[2]:
            best = (j, coef, residual)
    return best[0], best[1]


def check_iht_oracle(instances: int = 20) -> SelftestCheck:
    """N=8，M=4，L=1，无噪声：IHT 与穷举预言机一致"""
    cfg = IhtConfig(sparsity_l=1, epsilon=1e-26, max_iters=5000)
    agree = 0
    worst = 0.0
    for i in range(instances):
        rng = rng_stream(SELFTEST_SEED, f"iht/{i}")
        A = generate_matrix(rng.child("matrix"), 4, 8)
        x = np.zeros(8, dtype=np.complex128)
        x[int(rng.subset(8, 1)[0])] = complex(*rng.normal(2))
        y = compress(A, x)
        result = iht_reconstruct(A, y, cfg)
        j, coef = oracle_one_sparse(A.entries, y)
        got = result.estimate.support.to_list()
        if got == [j]:
            agree += 1
            worst = max(worst, abs(result.estimate.dense[j] - coef))
        else:
            worst = math.inf
    return SelftestCheck("iht_oracle", agree == instances and worst < 1e-8, f"agree={agree}/{instances} err={worst:.3e}")


CHECKS: tuple[Callable[[], SelftestCheck], ...] = (
    check_noiseless_exactness,
    check_power_budget,
    check_iht_oracle,
    check_channel_accounting,
)


def run_selftest() -> list[SelftestCheck]:
    """依次执行所有自检并记录日志"""
    results = []
    for check in CHECKS:
        result = check()
        log_event(
            "selftest",
            level="info" if result.passed else "error",
            check=result.name,
            passed=result.passed,
            detail=result.detail,
        )
        results.append(result)
    return results
