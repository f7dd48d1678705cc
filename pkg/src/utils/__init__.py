# Input: helper and logger modules
# Output: utils exports
# Pos: utils package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
工具模块

导出：
- setup_logger, get_logger, log_event: 日志工具
- log_startup, log_shutdown, log_round, log_skip, log_support, log_error: 便捷日志函数
- format_float, current_time_ms, squared_norm, half_ceil: 辅助函数
"""

from src.utils.logger import (
    setup_logger,
    get_logger,
    log_event,
    log_startup,
    log_shutdown,
    log_round,
    log_skip,
    log_support,
    log_error,
)
from src.utils.helpers import (
    format_float,
    current_time_ms,
    squared_norm,
    half_ceil,
)

__all__ = [
    # 日志
    "setup_logger",
    "get_logger",
    "log_event",
    "log_startup",
    "log_shutdown",
    "log_round",
    "log_skip",
    "log_support",
    "log_error",
    # 辅助
    "format_float",
    "current_time_ms",
    "squared_norm",
    "half_ceil",
]
