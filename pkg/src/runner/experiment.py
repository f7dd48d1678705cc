# Input: ExperimentConfig, seed, optional stop event
# Output: metrics_seed{S}.csv, power_seed{S}.csv, hist snapshot, config echo, optional matrix_seed{S}.bin; RoundMetrics lists
# Pos: multi-round FedAvg simulation loop per seed
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
实验运行模块

职责：
- 按种子准备数据、划分、初始模型与测量矩阵（全部由 (seed, "fl/...") 标签流派生）
- 逐轮执行设计流水线，CSV 每轮写入并 flush（中断后仅保留完整行）
- 记录每设备发送能量、首次达到准确率门限时的直方图快照
"""

import csv
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from src.config.loader import ConfigLoader
from src.config.models import ExperimentConfig
from src.fedcore.data import load_mnist, synthetic_blobs
from src.fedcore.model import Mlp
from src.fedcore.partition import partition_iid, partition_noniid
from src.linmap.matrix import dump_matrix, generate_matrix, load_matrix, rip_probe
from src.models import CSV_COLUMNS, ModelParams, PowerBudgetError, RoundFailedError, RoundMetrics
from src.numcore.rng import RngStream, rng_stream
from src.pipelines.designs import RoundContext, run_round
from src.pipelines.metrics import dump_histogram_snapshot
from src.utils.helpers import current_time_ms
from src.utils.logger import log_event, log_round

ROOT_LABEL = "fl"
POWER_COLUMNS = ("seed", "round", "device", "energy", "budget")
RIP_TRIALS = 100


@dataclass(eq=False)
class SeedSetup:
    """单个种子的初始状态"""
    root: RngStream
    theta: ModelParams
    ctx: RoundContext


def metrics_path(output_dir: Path, seed: int) -> Path:
    return output_dir / f"metrics_seed{seed}.csv"


def power_path(output_dir: Path, seed: int) -> Path:
    return output_dir / f"power_seed{seed}.csv"


def histogram_path(output_dir: Path, seed: int, round_index: int) -> Path:
    return output_dir / f"hist_seed{seed}_round{round_index}.txt"


def matrix_path(output_dir: Path, seed: int) -> Path:
    return output_dir / f"matrix_seed{seed}.bin"


def prepare_seed(cfg: ExperimentConfig, seed: int) -> SeedSetup:
    """
    准备单个种子的数据、划分、模型与矩阵

    Raises:
        ValueError: 缺少 MNIST 目录、划分不可整除、数据与模型维度不符
        FileNotFoundError: MNIST 文件不存在
    """
    root = rng_stream(seed, ROOT_LABEL)

    # å è½½æ°æ®
    if cfg.dataset == "synthetic":
        train, test = synthetic_blobs(
            root.child("data"),
            n_train=cfg.synthetic_train,
            n_test=cfg.synthetic_test,
            features=cfg.synthetic_features,
            classes=cfg.synthetic_classes,
            spread=cfg.synthetic_spread,
        )
    else:
        if cfg.mnist_dir is None:
            raise ValueError("dataset=mnist 需要设置 mnist_dir 或环境变量 OTAFL_DATA_DIR")
        train, test = load_mnist(cfg.mnist_dir, train_subset=cfg.train_subset, test_subset=cfg.test_subset)
    if train.features.shape[1] != cfg.model_layers[0]:
        raise ValueError(f"特征维度 {train.features.shape[1]} 与 model_layers[0]={cfg.model_layers[0]} 不一致")

    # ååå° K_total ä¸ªè®¾å¤
    if cfg.partition == "noniid":
        partitions = partition_noniid(train, cfg.k_total, cfg.shards_per_device, root.child("partition"))
    else:
        partitions = partition_iid(train, cfg.k_total, root.child("partition"))

    # åå§åå¨å±æ¨¡å
    model = Mlp(cfg.model_layers, bias=cfg.model_bias, loss=cfg.model_loss)
    theta = model.init_params(root.child("init"))

    design = cfg.design_spec()
    matrix = None
    # æ´ä¸ªç§å­å±ç¨ä¸ä¸ªæµéç©éµ
    if design.uses_matrix and not design.matrix_per_round:
        if cfg.matrix_file is not None:
            # 外部矩阵：尺寸必须与本实验的 M×N 一致
            matrix = load_matrix(cfg.matrix_file)
            if (matrix.m, matrix.n) != (design.compressed_m, cfg.baseband_dim):
                raise ValueError(
                    f"矩阵文件尺寸 {matrix.m}x{matrix.n} 与配置 {design.compressed_m}x{cfg.baseband_dim} 不一致"
                )
        else:
            matrix = generate_matrix(root.child("matrix"), design.compressed_m, cfg.baseband_dim, design.matrix_c)
        rip_probe(matrix, design.sparsity_l, RIP_TRIALS, root.child("rip"))
        if cfg.matrix_dump:
            path = matrix_path(cfg.output_dir, seed)
            dump_matrix(matrix, path)
            log_event("matrix", seed=seed, dumped=str(path))

    ctx = RoundContext(
        model=model,
        partitions=partitions,
        testset=test,
        sgd=cfg.sgd(),
        channel=cfg.channel(),
        seed=seed,
        matrix=matrix,
    )
    return SeedSetup(root=root, theta=theta, ctx=ctx)


def run_seed(
    cfg: ExperimentConfig,
    seed: int,
    *,
    stop_event: Optional[threading.Event] = None,
) -> list[RoundMetrics]:
    """
    运行单个种子的 T 轮实验

    Args:
        cfg: 实验配置
        seed: 主种子
        stop_event: 置位后在当前轮结束时停止

    Returns:
        各轮 RoundMetrics

    Raises:
        RoundFailedError: 某一轮失败（携带轮次与种子）
    """
    output_dir = cfg.output_dir
    output_dir.mkdir(parents=True, exist_ok=True)
    design = cfg.design_spec()
    if design.rule_of_thumb_violated():
        log_event("rule_of_thumb", seed=seed, M=design.compressed_m, L=design.sparsity_l)

    started_ms = current_time_ms()
    setup = prepare_seed(cfg, seed)
    theta, ctx = setup.theta, setup.ctx
    results: list[RoundMetrics] = []
    cum_uses = 0
    snapshot_taken = False

    # åè¡¨å¤´åéè½® flushï¼ä¸­æ­æ¶å·²å®æçè½®æ¬¡ä¿çå¨æä»¶ä¸­
    with open(metrics_path(output_dir, seed), "w", newline="", encoding="utf-8") as mf, \
            open(power_path(output_dir, seed), "w", newline="", encoding="utf-8") as pf:
        metrics_writer = csv.writer(mf, lineterminator="\n")
        power_writer = csv.writer(pf, lineterminator="\n")
        metrics_writer.writerow(CSV_COLUMNS)
        power_writer.writerow(POWER_COLUMNS)
        mf.flush()
        pf.flush()

        for t in range(1, cfg.rounds + 1):
            # åªå¨è½®æ¬¡è¾¹çååºåæ­¢
            if stop_event is not None and stop_event.is_set():
                log_event("shutdown", seed=seed, round=t, reason="stop_requested")
                break
            try:
                theta, metrics = run_round(design, theta, ctx, setup.root, t)
            except PowerBudgetError as e:
                log_event("power", seed=seed, round=t, device=e.device, energy=e.energy, budget=e.budget)
                raise RoundFailedError(f"第 {t} 轮失败 (seed={seed}): {e}", round_index=t, seed=seed) from e
            except Exception as e:
                raise RoundFailedError(f"第 {t} 轮失败 (seed={seed}): {e}", round_index=t, seed=seed) from e

            # è®°å½ææ ä¸æ¯è®¾å¤è½é
            cum_uses += metrics.channel_uses
            metrics_writer.writerow(metrics.as_csv_row(cum_uses))
            for device, energy in zip(metrics.device_ids.tolist(), metrics.per_device_energy.tolist()):
                power_writer.writerow([seed, t, device, repr(energy), repr(cfg.p_tot)])
            mf.flush()
            pf.flush()
            results.append(metrics)
            log_round(
                seed, t, metrics.channel_uses, metrics.test_accuracy,
                metrics.agg_nmse, metrics.eta, metrics.iht_iterations,
            )

            if (
                # åç¡®çé¦æ¬¡è¾¾å°éå¼æ¶åä¸æ¬¡ç´æ¹å¾å¿«ç§
                not snapshot_taken
                and not metrics.skipped
                and metrics.test_accuracy >= cfg.histogram_threshold
                and ctx.last_truth is not None
                and ctx.last_estimate is not None
            ):
                truth_hist, est_hist = dump_histogram_snapshot(
                    histogram_path(output_dir, seed, t),
                    ctx.last_truth,
                    ctx.last_estimate,
                    cfg.histogram_bins,
                    round_index=t,
                    accuracy=metrics.test_accuracy,
                )
                snapshot_taken = True
                log_event(
                    "histogram",
                    seed=seed,
                    round=t,
                    zero_truth=truth_hist.zero_fraction,
                    zero_estimate=est_hist.zero_fraction,
                )

    final_acc = results[-1].test_accuracy if results else math.nan
    log_event(
        "seed_done",
        seed=seed,
        rounds=len(results),
        acc=final_acc,
        cum_uses=cum_uses,
        elapsed_ms=current_time_ms() - started_ms,
    )
    return results


def run_experiment(
    cfg: ExperimentConfig,
    *,
    stop_event: Optional[threading.Event] = None,
) -> dict[int, list[RoundMetrics]]:
    """
    顺序运行所有种子并回显配置（并行执行见 Application）

    Returns:
        {seed: [RoundMetrics, ...]}
    """
    write_config_echo(cfg)
    return {seed: run_seed(cfg, seed, stop_event=stop_event) for seed in cfg.seeds}


def write_config_echo(cfg: ExperimentConfig) -> Path:
    """在输出目录写出 config.yaml"""
    return ConfigLoader.save(cfg, cfg.output_dir / "config.yaml")
