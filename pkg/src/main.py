# Input: CLI args, config path, env vars, OS signals
# Output: experiment runs (CSV outputs), plot tables, selftest exit code
# Pos: application entrypoint and orchestrator
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
ota-cs-fl: 空中计算联邦学习压缩感知仿真器

入口模块

职责：
- 加载配置与日志
- 以有界并发（workers）运行各个种子任务
- 处理 SIGINT/SIGTERM：当前轮结束后停止，输出文件只包含完整行
- 命令行：run / plotdata / selftest
"""

import argparse
import asyncio
import os
import signal
import sys
import threading
from pathlib import Path
from typing import Any, Optional, Sequence

# 加载 .env 文件（必须在其他导入之前）
from dotenv import load_dotenv
load_dotenv()

from src.config.loader import ConfigLoader
from src.config.models import ExperimentConfig
from src.models import PlotMode, RoundMetrics
from src.runner.experiment import run_seed, write_config_echo
from src.runner.plotdata import emit_plotdata
from src.runner.selftest import run_selftest
from src.utils.logger import get_logger, log_error, log_event, log_shutdown, log_startup, setup_logger

LOG_DIR_ENV = "OTAFL_LOG_DIR"


def _log_dir() -> Path:
    return Path(os.environ.get(LOG_DIR_ENV, "logs"))


class Application:
    """实验应用：管理种子任务的生命周期"""

    def __init__(self, config_path: Path, *, log_dir: Optional[Path] = None, console: bool = True):
        """
        Args:
            config_path: 配置文件路径
            log_dir: 日志目录（默认取 OTAFL_LOG_DIR 或 logs）
            console: 是否输出到控制台
        """
        self.config_path = config_path
        self.log_dir = log_dir or _log_dir()
        self.console = console
        self.config: Optional[ExperimentConfig] = None
        self.results: dict[int, list[RoundMetrics]] = {}
        self.failed: dict[int, BaseException] = {}

        self._shutdown_event = asyncio.Event()
        self._stop_flag = threading.Event()  # 供工作线程在轮次之间检查
        self._seed_tasks: dict[int, asyncio.Task[list[RoundMetrics]]] = {}

    async def initialize(self) -> None:
        """加载配置、配置日志并回显配置"""
        setup_logger(self.log_dir, level="INFO", file_level="DEBUG", console=self.console)
        self.config = ConfigLoader(self.config_path).load()
        log_startup(self.config.design.value, self.config.seeds)
        write_config_echo(self.config)

    def _on_background_task_done(self, task: asyncio.Task[Any], seed: int) -> None:
        """种子任务退出回调：记录异常并触发关闭"""
        try:
            exc = task.exception()
        except asyncio.CancelledError:
            return
        if exc:
            self.failed[seed] = exc
            log_error(f"种子任务异常退出: seed={seed} - {exc}", seed=seed)
            self.request_shutdown()

    async def _run_seed(self, seed: int, semaphore: asyncio.Semaphore) -> list[RoundMetrics]:
        assert self.config is not None
        async with semaphore:
            if self._stop_flag.is_set():
                return []
            return await asyncio.to_thread(run_seed, self.config, seed, stop_event=self._stop_flag)

    async def run(self) -> dict[int, list[RoundMetrics]]:
        """
        运行所有种子

        Returns:
            {seed: [RoundMetrics, ...]}（被中断的种子只包含已完成的轮次）
        """
        if self.config is None:
            raise ValueError("应用未初始化，请先调用 initialize()")
        # æ¯ä¸ªç§å­ä¸ä¸ªåå°ä»»å¡ï¼å¹¶åæ°å workers éå¶
        semaphore = asyncio.Semaphore(self.config.workers)
        for seed in self.config.seeds:
            task = asyncio.create_task(self._run_seed(seed, semaphore))
            task.add_done_callback(lambda t, s=seed: self._on_background_task_done(t, s))
            self._seed_tasks[seed] = task

        # ç­å¾å¨é¨å®æææ¶å°å³é­è¯·æ±
        all_done = asyncio.gather(*self._seed_tasks.values(), return_exceptions=True)
        stop_wait = asyncio.create_task(self._shutdown_event.wait())
        await asyncio.wait({all_done, stop_wait}, return_when=asyncio.FIRST_COMPLETED)
        if self._shutdown_event.is_set():
            self._stop_flag.set()
        await all_done
        stop_wait.cancel()

        # åªä¿çæ­£å¸¸ç»æçç§å­ç»æ
        for seed, task in self._seed_tasks.items():
            if task.exception() is None:
                self.results[seed] = task.result()
        await self.shutdown()
        return self.results

    async def shutdown(self) -> None:
        """记录关闭原因"""
        if self.failed:
            reason = "error"
        elif self._shutdown_event.is_set():
            reason = "signal"
        else:
            reason = "normal"
        log_shutdown(reason)

    def request_shutdown(self) -> None:
        """请求关闭（当前轮结束后停止）"""
        self._shutdown_event.set()
        self._stop_flag.set()


async def run_app(config_path: Path) -> int:
    """
    运行实验应用

    Returns:
        进程退出码（任一种子失败时为 1）
    """
    app = Application(config_path)

    # 设置信号处理器
    loop = asyncio.get_running_loop()

    def signal_handler() -> None:
        get_logger().info("收到关闭信号")
        app.request_shutdown()

    # SIGINT/SIGTERM åèµ°åä¸å³é­è·¯å¾
    for sig in (signal.SIGINT, signal.SIGTERM):
        loop.add_signal_handler(sig, signal_handler)

    try:
        await app.initialize()
        await app.run()
    except Exception as e:
        log_error(f"应用错误: {e}")
        raise
    return 1 if app.failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.main", description="OtA 联邦学习仿真器")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="运行实验")
    run.add_argument("config", type=Path, help="配置文件路径")

    plot = sub.add_parser("plotdata", help="生成绘图数据表")
    plot.add_argument("mode", choices=[m.value for m in PlotMode])
    plot.add_argument("inputs", nargs="+", type=Path, help="指标 CSV 或直方图快照")
    plot.add_argument("--out", type=Path, default=None, help="输出文件（默认打印到标准输出）")
    plot.add_argument("--smooth", type=int, default=None, help="准确率移动平均窗口")

    sub.add_parser("selftest", help="快速自检")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口，返回退出码"""
    args = build_parser().parse_args(argv)

    # run èªè¡åå§åæ¥å¿ï¼ç®å½æ¥èªéç½®ï¼
    if args.command == "run":
        return asyncio.run(run_app(args.config))

    setup_logger(_log_dir(), level="WARNING" if args.command == "plotdata" else "INFO")
    if args.command == "plotdata":
        table = emit_plotdata(args.inputs, args.mode, smooth=args.smooth, out=args.out)
        if args.out is None:
            sys.stdout.write(table.to_csv(sep=" ", index=False, lineterminator="\n"))
        return 0

    # selftest
    results = run_selftest()
    failed = [r.name for r in results if not r.passed]
    log_event("selftest", level="error" if failed else "info", passed=len(results) - len(failed), failed=",".join(failed) or None)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
