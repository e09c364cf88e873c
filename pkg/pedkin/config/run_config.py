"""
运行配置管理模块
读取可选的 YAML 配置文件为各子命令提供默认值，并验证单次运行的参数
"""

import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import yaml

from ..errors import ConfigError
from ..kinship.matrix import DiagonalConvention, PsiMode
from ..kinship.sampler import MergeRule
from ..pedigree.io import MATRIX_FORMATS
from ..ui.display import ui

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "pedkin.yaml"
CONFIG_ENV_VAR = "PEDKIN_CONFIG"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
SUBCOMMANDS = ("exact", "cut", "sample", "simulate", "ancestors", "states", "verify", "bench", "config-init")


@dataclass(frozen=True)
class Settings:
    """配置文件解析后的默认值"""

    threads: int = 1
    diagonal: str = DiagonalConvention.INBREEDING.value
    format: str = "dense"
    merge_rule: str = MergeRule.UNBIASED_2PSI.value
    samples: int = 10000
    max_segment: int = 1000
    log_level: str = "WARNING"


@dataclass(frozen=True)
class RunConfig:
    """
    单次运行的完整参数，在任何计算开始前验证。

    inputs 为输入文件路径；output 为 None 时写到 stdout。
    """

    subcommand: str
    inputs: Tuple[str, ...] = ()
    diagonal: DiagonalConvention = DiagonalConvention.INBREEDING
    psi_mode: PsiMode = PsiMode.ZERO
    samples: Optional[int] = None
    seed: Optional[int] = None
    merge_rule: MergeRule = MergeRule.UNBIASED_2PSI
    max_segment: Optional[int] = None
    output: Optional[str] = None
    fmt: str = "dense"
    threads: int = 1

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"未知子命令: {self.subcommand}")
        if self.fmt not in MATRIX_FORMATS:
            raise ConfigError(f"输出格式必须是 {' / '.join(MATRIX_FORMATS)}")
        if self.threads < 1:
            raise ConfigError("线程数必须 >= 1")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("抽样次数必须 >= 1")
        if self.max_segment is not None and self.max_segment < 1:
            raise ConfigError("片段上限必须 >= 1")
        for path in self.inputs:
            if path != "-" and not os.path.exists(path):
                raise ConfigError(f"输入文件不存在: {path}")


class RunConfigManager:
    """运行配置管理器"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or os.environ.get(CONFIG_ENV_VAR) or DEFAULT_CONFIG_PATH
        self.defaults_info: Dict[str, Dict[str, Any]] = {
            "threads": {"type": int, "min": 1, "description": "线程数（抽样器、穷举预言机）"},
            "diagonal": {"choices": [c.value for c in DiagonalConvention], "description": "对角线约定"},
            "format": {"choices": list(MATRIX_FORMATS), "description": "矩阵输出格式"},
            "merge_rule": {"choices": [r.value for r in MergeRule], "description": "奠基者合并规则"},
            "samples": {"type": int, "min": 1, "description": "抽样次数 S"},
            "max_segment": {"type": int, "min": 1, "description": "递归切割的片段上限"},
        }

    def has_config_file(self) -> bool:
        return os.path.exists(self.config_path)

    def _read(self) -> Dict[str, Any]:
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"无法解析配置文件 {self.config_path}: {e}") from e
        if config is None:
            return {}
        if not isinstance(config, dict):
            raise ConfigError(f"配置文件 {self.config_path} 的顶层必须是映射")
        return config

    def problems(self, config: Dict[str, Any]) -> List[str]:
        """列出配置中的全部问题，空列表表示有效"""
        found = []
        unknown = set(config) - {"defaults", "logging"}
        if unknown:
            found.append(f"未知的配置部分: {', '.join(sorted(unknown))}")

        defaults = config.get("defaults") or {}
        if not isinstance(defaults, dict):
            return found + ["'defaults' 部分必须是映射"]
        for key, value in defaults.items():
            info = self.defaults_info.get(key)
            if info is None:
                found.append(f"未知的默认值: {key}")
            elif "choices" in info and value not in info["choices"]:
                found.append(f"{key} 必须是 {' / '.join(info['choices'])} 之一")
            elif "type" in info and (
                isinstance(value, bool) or not isinstance(value, info["type"]) or value < info["min"]
            ):
                found.append(f"{key} 必须是 >= {info['min']} 的整数")

        logging_section = config.get("logging") or {}
        if not isinstance(logging_section, dict):
            found.append("'logging' 部分必须是映射")
        elif "level" in logging_section and str(logging_section["level"]).upper() not in LOG_LEVELS:
            found.append(f"日志级别必须是 {' / '.join(LOG_LEVELS)} 之一")
        return found

    def validate_config(self) -> bool:
        """验证配置文件"""
        try:
            found = self.problems(self._read())
        except (OSError, ConfigError) as e:
            ui.print_error(f"配置文件验证失败: {e}")
            return False
        for problem in found:
            ui.print_error(problem)
        if found:
            return False
        ui.print_success("配置文件验证通过")
        return True

    def load(self) -> Settings:
        """
        读取配置；文件不存在时返回内置默认值。

        Raises:
            ConfigError: 文件无法解析或包含无效值
        """
        if not self.has_config_file():
            logger.debug(f"未找到配置文件 {self.config_path}，使用内置默认值")
            return Settings()
        config = self._read()
        found = self.problems(config)
        if found:
            raise ConfigError(f"配置文件 {self.config_path} 无效: " + "; ".join(found))
        values = dict(config.get("defaults") or {})
        level = (config.get("logging") or {}).get("level")
        if level is not None:
            values["log_level"] = str(level).upper()
        logger.debug(f"已加载配置文件 {self.config_path}")
        return Settings(**values)

    def generate_default_config(self) -> Dict[str, Any]:
        """生成默认配置"""
        base = Settings()
        return {
            "defaults": {
                "threads": base.threads,
                "diagonal": base.diagonal,
                "format": base.format,
                "merge_rule": base.merge_rule,
                "samples": base.samples,
                "max_segment": base.max_segment,
            },
            "logging": {"level": "INFO"},
        }

    def save_config(self, config: Dict[str, Any]) -> bool:
        """保存配置到文件"""
        try:
            directory = os.path.dirname(self.config_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.config_path, "w", encoding="utf-8") as f:
                yaml.dump(config, f, default_flow_style=False, allow_unicode=True, indent=2, sort_keys=False)
            ui.print_success(f"配置已保存到: {self.config_path}")
            return True
        except OSError as e:
            ui.print_error(f"保存配置失败: {e}")
            return False
