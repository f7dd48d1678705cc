# Input: experiment, plotdata and selftest modules
# Output: runner exports
# Pos: runner package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
实验编排模块

导出：
- run_experiment, run_seed, prepare_seed, write_config_echo: 实验运行
- emit_plotdata, read_metrics: 绘图数据
- run_selftest: 自检
"""

from src.runner.experiment import prepare_seed, run_experiment, run_seed, write_config_echo
from src.runner.plotdata import emit_plotdata, read_metrics
from src.runner.selftest import run_selftest

__all__ = [
    "prepare_seed",
    "run_experiment",
    "run_seed",
    "write_config_echo",
    "emit_plotdata",
    "read_metrics",
    "run_selftest",
]
