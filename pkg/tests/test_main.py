# Input: 被测模块与 pytest 夹具
# Output: pytest 断言结果
# Pos: 测试用例
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
main.py 应用生命周期与命令行测试
"""

import asyncio
import threading
from pathlib import Path
from tempfile import TemporaryDirectory

import pytest

import src.main as main_module
from src.main import LOG_DIR_ENV, Application, build_parser, main
from src.models import CSV_COLUMNS
from src.runner.experiment import metrics_path
from src.utils.logger import setup_logger

TOY_CONFIG = """\
design: case2_sparse_reduced
sparsity_l: 10
dataset: synthetic
model_layers: [16, 10]
k_total: 10
k_per_round: 4
rounds: 3
seeds: [0, 1]
workers: 2
sigma2: 0.0
h_th: 0.0
output_dir: {output}
"""


@pytest.fixture(autouse=True)
def setup_logger_for_tests():
    """每个测试前设置 logger"""
    with TemporaryDirectory() as tmpdir:
        setup_logger(Path(tmpdir), console=False)
        yield


@pytest.fixture
def workspace(monkeypatch):
    """临时目录：config.yaml、输出目录与日志目录"""
    with TemporaryDirectory() as tmpdir:
        root = Path(tmpdir)
        (root / "config.yaml").write_text(TOY_CONFIG.format(output=root / "results"), encoding="utf-8")
        monkeypatch.setenv(LOG_DIR_ENV, str(root / "logs"))
        yield root


def _app(root: Path) -> Application:
    return Application(root / "config.yaml", log_dir=root / "logs", console=False)


class TestApplication:
    """Application 生命周期测试"""

    @pytest.mark.asyncio
    async def test_runs_all_seeds(self, workspace):
        app = _app(workspace)
        await app.initialize()
        results = await asyncio.wait_for(app.run(), timeout=60.0)
        assert sorted(results) == [0, 1]
        assert all(len(rows) == 3 for rows in results.values())
        assert (workspace / "results" / "config.yaml").exists()
        assert metrics_path(workspace / "results", 1).exists()
        assert app.failed == {}

    @pytest.mark.asyncio
    async def test_run_requires_initialize(self, workspace):
        with pytest.raises(ValueError):
            await _app(workspace).run()

    @pytest.mark.asyncio
    async def test_shutdown_before_run(self, workspace):
        app = _app(workspace)
        await app.initialize()
        app.request_shutdown()
        results = await asyncio.wait_for(app.run(), timeout=10.0)
        assert results == {0: [], 1: []}

    @pytest.mark.asyncio
    async def test_shutdown_stops_running_seeds(self, workspace, monkeypatch):
        """运行中请求关闭：工作线程在轮次之间看到停止标志"""
        started = threading.Event()

        def blocking_seed(cfg, seed, *, stop_event):
            started.set()
            stop_event.wait(timeout=10.0)
            return []

        monkeypatch.setattr(main_module, "run_seed", blocking_seed)
        app = _app(workspace)
        await app.initialize()

        async def trigger_shutdown() -> None:
            while not started.is_set():
                await asyncio.sleep(0.01)
            app.request_shutdown()

        trigger = asyncio.create_task(trigger_shutdown())
        results = await asyncio.wait_for(app.run(), timeout=5.0)
        await trigger
        assert results == {0: [], 1: []}

    @pytest.mark.asyncio
    async def test_failed_seed_recorded(self, workspace, monkeypatch):
        def failing_seed(cfg, seed, *, stop_event):
            if seed == 1:
                raise RuntimeError("boom")
            return []

        monkeypatch.setattr(main_module, "run_seed", failing_seed)
        app = _app(workspace)
        await app.initialize()
        results = await asyncio.wait_for(app.run(), timeout=5.0)
        assert list(results) == [0]
        assert isinstance(app.failed[1], RuntimeError)


class TestCommandLine:
    """命令行测试"""

    def test_parser_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_parser_rejects_unknown_mode(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["plotdata", "sideways", "a.csv"])

    def test_run_command(self, workspace):
        assert main(["run", str(workspace / "config.yaml")]) == 0
        text = metrics_path(workspace / "results", 0).read_text(encoding="utf-8")
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
        assert len(text.splitlines()) == 4

    def test_plotdata_stdout(self, workspace, capsys):
        main(["run", str(workspace / "config.yaml")])
        capsys.readouterr()
        csv_path = metrics_path(workspace / "results", 0)
        assert main(["plotdata", "vs_channel_uses", str(csv_path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "cum_channel_uses accuracy"
        assert [line.split()[0] for line in lines[1:]] == ["10", "20", "30"]

    def test_selftest_command(self, workspace):
        assert main(["selftest"]) == 0
