"""
配置管理包
提供 YAML 配置文件与单次运行参数的管理
"""

from .run_config import RunConfig, RunConfigManager, Settings

__all__ = ["RunConfig", "RunConfigManager", "Settings"]
