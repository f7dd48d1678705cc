# Input: runner 模块、pandas 与 pytest
# Output: 实验循环、CSV 输出、绘图数据与自检的断言
# Pos: runner 测试
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
实验编排单元测试
"""

import os
import threading
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import pandas as pd
import pytest

from src.config import ConfigLoader, ExperimentConfig
from src.config.loader import DATA_DIR_ENV
from src.fedcore.data import synthetic_blobs
from src.fedcore.model import Mlp
from src.fedcore.partition import partition_noniid
from src.fedcore.training import evaluate, local_update, select_devices
from src.models import CSV_COLUMNS, DesignKind, MaskMode, ModelParams, RoundFailedError, RoundMetrics
from src.numcore.rng import rng_stream
from src.runner import experiment
from src.runner.experiment import histogram_path, metrics_path, power_path, run_experiment, run_seed
from src.runner.plotdata import emit_plotdata, read_histogram, read_metrics
from src.runner.selftest import run_selftest
from src.utils.logger import setup_logger


@pytest.fixture(autouse=True)
def setup_logger_for_tests():
    """每个测试前设置 logger"""
    with TemporaryDirectory() as tmpdir:
        setup_logger(Path(tmpdir), console=False)
        yield


@pytest.fixture
def output_dir():
    with TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def _toy_config(output: Path, **overrides) -> ExperimentConfig:
    """合成数据、d=170 模型、K_total=10、K=4 的桌面规模配置"""
    values = dict(
        dataset="synthetic",
        model_layers=[16, 10],
        k_total=10,
        k_per_round=4,
        rounds=30,
        seeds=[0],
        design=DesignKind.CASE1_UNCOMPRESSED,
        sigma2=0.0,
        h_th=0.0,
        lr=0.05,
        batch_size=50,
        sparsity_l=10,
        compressed_m=40,
        output_dir=output,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def _centralized_fedavg(cfg: ExperimentConfig, seed: int) -> float:
    """相同选择与批次下直接计算 θ ← θ + Σ w_k Δθ_k 的准确率"""
    root = rng_stream(seed, "fl")
    train, test = synthetic_blobs(
        root.child("data"),
        n_train=cfg.synthetic_train,
        n_test=cfg.synthetic_test,
        features=cfg.synthetic_features,
        classes=cfg.synthetic_classes,
        spread=cfg.synthetic_spread,
    )
    parts = partition_noniid(train, cfg.k_total, cfg.shards_per_device, root.child("partition"))
    model = Mlp(cfg.model_layers)
    theta = model.init_params(root.child("init"))
    for t in range(1, cfg.rounds + 1):
        selected = select_devices(root.child(f"select/{t}"), cfg.k_total, cfg.k_per_round)
        chosen = [parts[int(k)] for k in selected]
        weights = np.array([p.weight for p in chosen])
        weights = weights / weights.sum()
        updates = np.stack([
            local_update(theta, p, cfg.sgd(), root.child(f"local/{t}/{p.device_id}"), model=model)
            for p in chosen
        ])
        theta = ModelParams(theta.theta + weights @ updates)
    return evaluate(theta, test, model=model)


class TestRunSeed:
    """单种子实验循环测试"""

    def test_zero_rounds_header_only(self, output_dir):
        cfg = _toy_config(output_dir, rounds=0)
        assert run_seed(cfg, 0) == []
        assert metrics_path(output_dir, 0).read_text(encoding="utf-8") == ",".join(CSV_COLUMNS) + "\n"

    def test_matches_centralized_fedavg(self, output_dir):
        """case1，σ²=0：最终准确率与集中式 FedAvg 相差 ≤ 1e-12"""
        cfg = _toy_config(output_dir)
        results = run_seed(cfg, 0)
        assert len(results) == 30
        assert abs(results[-1].test_accuracy - _centralized_fedavg(cfg, 0)) <= 1e-12
        assert all(m.agg_nmse < 1e-20 for m in results)

    def test_byte_identical_rerun(self):
        contents = []
        for _ in range(2):
            with TemporaryDirectory() as tmpdir:
                cfg = _toy_config(
                    Path(tmpdir), design=DesignKind.CASE3_SPARSE_COMPRESSED, sigma2=1.0, rounds=5
                )
                run_seed(cfg, 3)
                contents.append(
                    (metrics_path(Path(tmpdir), 3).read_bytes(), power_path(Path(tmpdir), 3).read_bytes())
                )
        assert contents[0] == contents[1]

    @pytest.mark.parametrize(
        "design,uses",
        [
            (DesignKind.CASE1_UNCOMPRESSED, 85),
            (DesignKind.CASE2_SPARSE_REDUCED, 10),
            (DesignKind.CASE3_SPARSE_COMPRESSED, 40),
            (DesignKind.CASE4_COMPRESSED_ONLY, 40),
        ],
    )
    def test_channel_use_accounting(self, output_dir, design, uses):
        cfg = _toy_config(output_dir, design=design, sigma2=1.0, rounds=4)
        run_seed(cfg, 1)
        df = read_metrics(metrics_path(output_dir, 1))
        assert (df["channel_uses"] == uses).all()
        assert df["cum_channel_uses"].tolist() == [uses * t for t in range(1, 5)]

    @pytest.mark.parametrize("design", list(DesignKind))
    def test_power_constraint_full_run(self, output_dir, design):
        """100 轮 × 3 种子：每设备能量 ≤ P_tot(1+1e-9)，每轮瓶颈设备等于 P_tot"""
        cfg = _toy_config(output_dir, design=design, sigma2=1.0, rounds=100, seeds=[0, 1, 2])
        run_experiment(cfg)
        for seed in cfg.seeds:
            power = pd.read_csv(power_path(output_dir, seed))
            assert (power["energy"] <= power["budget"] * (1 + 1e-9)).all()
            peak = power.groupby("round")["energy"].max()
            np.testing.assert_allclose(peak.to_numpy(), cfg.p_tot, rtol=1e-9)

    def test_stop_event_before_start(self, output_dir):
        stop = threading.Event()
        stop.set()
        assert run_seed(_toy_config(output_dir), 0, stop_event=stop) == []
        assert len(read_metrics(metrics_path(output_dir, 0))) == 0

    def test_failed_round_keeps_complete_rows(self, output_dir, monkeypatch):
        """第 3 轮失败：CSV 保留前 2 轮完整行"""
        real_run_round = experiment.run_round

        def failing(design, theta, ctx, rng, round_index):
            if round_index == 3:
                raise RuntimeError("injected")
            return real_run_round(design, theta, ctx, rng, round_index)

        monkeypatch.setattr(experiment, "run_round", failing)
        with pytest.raises(RoundFailedError) as excinfo:
            run_seed(_toy_config(output_dir), 0)
        assert excinfo.value.round_index == 3
        assert read_metrics(metrics_path(output_dir, 0))["round"].tolist() == [1, 2]

    def test_histogram_snapshot(self, output_dir):
        cfg = _toy_config(output_dir, design=DesignKind.CASE2_SPARSE_REDUCED, histogram_threshold=0.0, rounds=2)
        run_seed(cfg, 0)
        table = read_histogram(histogram_path(output_dir, 0, 1))
        assert list(table.columns) == ["bin_center", "truth", "estimate"]
        assert len(table) == cfg.histogram_bins
        assert not histogram_path(output_dir, 0, 2).exists()

    def test_matrix_dump_and_reload(self):
        """导出的矩阵作为 matrix_file 重新读入：逐字节相同的指标"""
        with TemporaryDirectory() as first, TemporaryDirectory() as second:
            design = DesignKind.CASE4_COMPRESSED_ONLY
            dumped = _toy_config(Path(first), design=design, sigma2=1.0, rounds=3, matrix_dump=True)
            run_seed(dumped, 0)
            matrix_file = experiment.matrix_path(Path(first), 0)
            assert matrix_file.stat().st_size == 16 + 40 * 85 * 8

            reloaded = _toy_config(Path(second), design=design, sigma2=1.0, rounds=3, matrix_file=matrix_file)
            run_seed(reloaded, 0)
            assert metrics_path(Path(first), 0).read_bytes() == metrics_path(Path(second), 0).read_bytes()

    def test_matrix_file_shape_mismatch(self, output_dir):
        dumped = _toy_config(output_dir, design=DesignKind.CASE4_COMPRESSED_ONLY, rounds=0, matrix_dump=True)
        run_seed(dumped, 0)
        cfg = _toy_config(
            output_dir,
            design=DesignKind.CASE4_COMPRESSED_ONLY,
            compressed_m=30,
            rounds=1,
            matrix_file=experiment.matrix_path(output_dir, 0),
        )
        with pytest.raises(ValueError, match="矩阵文件尺寸"):
            run_seed(cfg, 0)

    def test_missing_mnist_dir(self, output_dir, monkeypatch):
        monkeypatch.delenv(DATA_DIR_ENV, raising=False)
        cfg = ExperimentConfig(rounds=1, output_dir=output_dir)
        with pytest.raises(ValueError):
            run_seed(cfg, 0)


class TestRunExperiment:
    """多种子实验测试"""

    def test_all_seeds_and_config_echo(self, output_dir, monkeypatch):
        monkeypatch.delenv(DATA_DIR_ENV, raising=False)
        cfg = _toy_config(output_dir, rounds=3, seeds=[0, 1])
        results = run_experiment(cfg)
        assert sorted(results) == [0, 1]
        assert all(len(rows) == 3 for rows in results.values())
        echo = output_dir / "config.yaml"
        assert ConfigLoader(echo).load() == cfg


def _write_metrics(path: Path, accuracies: list[float], uses: int, seed: int = 0) -> Path:
    cum = 0
    lines = [",".join(CSV_COLUMNS)]
    for t, acc in enumerate(accuracies, start=1):
        cum += uses
        row = RoundMetrics(round=t, channel_uses=uses, test_accuracy=acc, agg_nmse=0.1, eta=1.0, seed=seed)
        lines.append(",".join(row.as_csv_row(cum)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestPlotdata:
    """绘图数据测试"""

    def test_vs_round_passthrough(self, output_dir):
        path = _write_metrics(output_dir / "a.csv", [0.1, 0.4, 0.5], uses=85)
        table = emit_plotdata([path], "vs_round")
        assert table["round"].tolist() == [1, 2, 3]
        assert table["accuracy"].tolist() == [0.1, 0.4, 0.5]

    def test_vs_channel_uses_accumulates(self, output_dir):
        """case2（L=500）：第 t 轮累计信道使用 500·t"""
        path = _write_metrics(output_dir / "case2.csv", [0.1] * 6, uses=500)
        table = emit_plotdata([path], "vs_channel_uses")
        assert table["cum_channel_uses"].tolist() == [500 * t for t in range(1, 7)]

    def test_three_seed_mean_band(self, output_dir):
        runs = [[0.1, 0.2], [0.3, 0.5], [0.5, 0.8]]
        paths = [_write_metrics(output_dir / f"s{i}.csv", acc, uses=10, seed=i) for i, acc in enumerate(runs)]
        table = emit_plotdata(paths, "vs_round")
        np.testing.assert_allclose(table["mean"], np.mean(runs, axis=0))
        np.testing.assert_allclose(table["min"], [0.1, 0.2])
        np.testing.assert_allclose(table["max"], [0.5, 0.8])

    def test_smoothing(self, output_dir):
        path = _write_metrics(output_dir / "a.csv", [0.0, 1.0, 0.0], uses=1)
        table = emit_plotdata([path], "vs_round", smooth=2)
        assert table["accuracy"].tolist() == [0.0, 0.5, 0.5]

    def test_schema_mismatch(self, output_dir):
        path = output_dir / "bad.csv"
        path.write_text("round,accuracy\n1,0.5\n", encoding="utf-8")
        with pytest.raises(ValueError):
            emit_plotdata([path], "vs_round")

    def test_no_inputs_and_bad_mode(self, output_dir):
        with pytest.raises(ValueError):
            emit_plotdata([], "vs_round")
        with pytest.raises(ValueError):
            emit_plotdata([output_dir / "a.csv"], "accuracy_vs_time")

    def test_writes_space_separated_table(self, output_dir):
        path = _write_metrics(output_dir / "a.csv", [0.25, 0.5], uses=40)
        out = output_dir / "plot" / "curve.dat"
        emit_plotdata([path], "vs_channel_uses", out=out)
        assert out.read_text(encoding="utf-8").splitlines() == [
            "cum_channel_uses accuracy",
            "40 0.25",
            "80 0.5",
        ]

    def test_histogram_mode(self, output_dir):
        cfg = _toy_config(output_dir, design=DesignKind.CASE2_SPARSE_REDUCED, histogram_threshold=0.0, rounds=1)
        run_seed(cfg, 0)
        table = emit_plotdata([histogram_path(output_dir, 0, 1)], "histogram")
        assert len(table) == cfg.histogram_bins
        assert (table["estimate"] >= 0).all()


def _design_tables(root: Path, cfg: ExperimentConfig, smooth: int) -> tuple[pd.DataFrame, pd.DataFrame]:
    """运行全部种子，返回 (按轮次, 按累计信道使用) 的多种子均值表"""
    run_experiment(cfg)
    paths = [metrics_path(cfg.output_dir, seed) for seed in cfg.seeds]
    return (
        emit_plotdata(paths, "vs_round", smooth=smooth, out=root / f"{cfg.output_dir.name}_round.dat"),
        emit_plotdata(paths, "vs_channel_uses", smooth=smooth),
    )


# case3 使用均匀相同掩码，与无稀疏化的 case4 比较
ORDERING_DESIGNS = {
    "case1": dict(design=DesignKind.CASE1_UNCOMPRESSED),
    "case2": dict(design=DesignKind.CASE2_SPARSE_REDUCED),
    "case3_uniform": dict(design=DesignKind.CASE3_SPARSE_COMPRESSED, mask_mode=MaskMode.UNIFORM_IDENTICAL),
    "case4": dict(design=DesignKind.CASE4_COMPRESSED_ONLY),
}


def _check_orderings(tables: dict[str, tuple[pd.DataFrame, pd.DataFrame]]) -> None:
    final = {name: by_round["mean"].iloc[-1] for name, (by_round, _) in tables.items()}
    # 无稀疏化不差于均匀稀疏化
    assert final["case4"] >= final["case3_uniform"]
    per_use = {
        name: by_uses["mean"].iloc[-1] / by_uses["cum_channel_uses"].iloc[-1]
        for name, (_, by_uses) in tables.items()
    }
    assert min(per_use, key=per_use.get) == "case1"


class TestLearningOrdering:
    """三种子均值上的设计排序"""

    def test_synthetic_orderings(self, output_dir):
        """合成数据（d=650，N=325，L=10，M=40）：case4 ≥ case3-均匀；case1 单位信道使用准确率最低"""
        tables = {}
        for name, overrides in ORDERING_DESIGNS.items():
            cfg = _toy_config(
                output_dir / name,
                synthetic_features=64,
                model_layers=[64, 10],
                rounds=25,
                seeds=[0, 1, 2],
                sigma2=1.0,
                **overrides,
            )
            tables[name] = _design_tables(output_dir, cfg, smooth=5)
        assert all(len(by_round) == 25 for by_round, _ in tables.values())
        _check_orderings(tables)

    @pytest.mark.skipif(not os.environ.get(DATA_DIR_ENV), reason=f"需要 {DATA_DIR_ENV} 指向 MNIST 目录")
    def test_mnist_desk_scale(self, output_dir):
        """MNIST 6000 样本子集，784→26→10，K_total=100，K=10，L=500，M=1000，T=200"""
        tables = {}
        for name, overrides in ORDERING_DESIGNS.items():
            cfg = ExperimentConfig(
                dataset="mnist",
                mnist_dir=Path(os.environ[DATA_DIR_ENV]),
                train_subset=6000,
                k_total=100,
                k_per_round=10,
                sparsity_l=500,
                compressed_m=1000,
                p_tot=1000.0,
                sigma2=1.0,
                rounds=200,
                seeds=[0, 1, 2],
                lr=0.05,
                batch_size=10,
                output_dir=output_dir / name,
                **overrides,
            )
            tables[name] = _design_tables(output_dir, cfg, smooth=5)
        assert tables["case1"][0]["mean"].iloc[-1] >= 0.75
        _check_orderings(tables)


class TestSelftest:
    """自检测试"""

    def test_all_checks_pass(self):
        results = run_selftest()
        assert [r.name for r in results] == [
            "noiseless_exactness",
            "power_budget",
            "iht_oracle",
            "channel_accounting",
        ]
        failed = [(r.name, r.detail) for r in results if not r.passed]
        assert failed == []
