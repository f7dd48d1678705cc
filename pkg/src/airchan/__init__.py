# Input: channel module
# Output: airchan exports
# Pos: airchan package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
OtA 信道模块

导出：
- draw_channels, truncate: 信道增益与截断
- compute_eta: 幅度缩放因子
- ota_round, ota_estimate: 叠加传输与后处理
"""

from src.airchan.channel import draw_channels, truncate, compute_eta, ota_round, ota_estimate

__all__ = ["draw_channels", "truncate", "compute_eta", "ota_round", "ota_estimate"]
