# Input: YAML config path and env vars
# Output: ExperimentConfig; flat YAML echo of a config
# Pos: config loader / writer
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
配置加载模块

职责：
- 加载扁平 YAML 配置文件并验证
- 未设置 mnist_dir 时从环境变量 OTAFL_DATA_DIR 读取
- 将配置写回同样的扁平形式（load(save(cfg)) == cfg）
"""

import os
from pathlib import Path
from typing import Optional

import yaml

from src.config.models import ExperimentConfig
from src.utils.logger import log_event

DATA_DIR_ENV = "OTAFL_DATA_DIR"


class ConfigLoader:
    """配置加载器"""

    def __init__(self, config_path: Path):
        """
        初始化配置加载器

        Args:
            config_path: 配置文件路径
        """
        self.config_path = config_path
        self._config: Optional[ExperimentConfig] = None

    def load(self) -> ExperimentConfig:
        """
        加载配置文件

        Returns:
            ExperimentConfig 对象

        Raises:
            FileNotFoundError: 配置文件不存在
            yaml.YAMLError: YAML 解析错误
            ValueError: 顶层不是键值映射
            pydantic.ValidationError: 配置验证错误（消息包含键名）
        """
        if not self.config_path.exists():
            raise FileNotFoundError(f"配置文件不存在: {self.config_path}")

        with open(self.config_path, "r", encoding="utf-8") as f:
            raw_config = yaml.safe_load(f) or {}
        if not isinstance(raw_config, dict):
            raise ValueError(f"配置文件顶层必须是键值映射: {self.config_path}")

        # éç½®æä»¶æªç»åºæ°æ®ç®å½æ¶ä»ç¯å¢åéè¯»å
        if raw_config.get("mnist_dir") is None and os.environ.get(DATA_DIR_ENV):
            raw_config["mnist_dir"] = os.environ[DATA_DIR_ENV]

        self._config = ExperimentConfig(**raw_config)
        log_event(
            "config",
            path=str(self.config_path),
            design=self._config.design.value,
            d=self._config.model_dim,
            N=self._config.baseband_dim,
            rounds=self._config.rounds,
            seeds=self._config.seeds,
        )
        return self._config

    @property
    def config(self) -> ExperimentConfig:
        """获取配置对象"""
        if self._config is None:
            raise ValueError("配置未加载，请先调用 load()")
        return self._config

    @staticmethod
    def dump(cfg: ExperimentConfig) -> str:
        """序列化为扁平 YAML 文本（键顺序与字段定义一致）"""
        return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False, allow_unicode=True)

    @staticmethod
    def save(cfg: ExperimentConfig, path: Path) -> Path:
        """写出配置文件"""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ConfigLoader.dump(cfg), encoding="utf-8")
        return path


def load_config(path: Path) -> ExperimentConfig:
    """加载并验证配置文件"""
    return ConfigLoader(path).load()
