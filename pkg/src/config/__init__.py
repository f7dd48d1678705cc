# Input: config loader and models
# Output: config exports
# Pos: config package initializer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
配置模块

导出：
- ConfigLoader, load_config: 配置加载器
- ExperimentConfig: 扁平实验配置
- DesignSpec, ChannelConfig, SgdConfig, IhtConfig: 派生视图
"""

from src.config.loader import ConfigLoader, load_config
from src.config.models import ChannelConfig, DesignSpec, ExperimentConfig, IhtConfig, SgdConfig

__all__ = [
    "ConfigLoader",
    "load_config",
    "ExperimentConfig",
    "DesignSpec",
    "ChannelConfig",
    "SgdConfig",
    "IhtConfig",
]
