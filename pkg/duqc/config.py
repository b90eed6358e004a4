# duqc/config.py
"""配置管理器，负责加载 assets/duqc.yaml 中的默认参数。

所有数值容差、oracle 比特上限以及快速路径参数都集中在这里，
其余模块通过 get_config() 读取，不直接解析 yaml。
"""

import copy
import logging
import os
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

ENV_ORACLE_CAP = "DUQC_ORACLE_CAP"

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), '..', 'assets', 'duqc.yaml'
)

# yaml 缺失时的兜底值，与 assets/duqc.yaml 保持一致
_FALLBACK: Dict[str, Any] = {
    'tolerance': {
        'unitarity': 1e-10,
        'solvable': 1e-10,
        'normalization': 1e-8,
        'compare': 1e-10,
    },
    'oracle': {
        'qubit_cap': 24,
        'qubit_cap_2d': 20,
        'assemble_cap': 12,
    },
    'fast_path': {
        'delta': 0.1,
        'budget_prefactor': 2.0,
    },
    'spectrum': {
        'gap': 1e-8,
        'max_retries': 32,
    },
    'folded_transfer': {
        'max_t': 4,
    },
    'output': {
        'format': 'json',
    },
}

_config: Optional[Dict[str, Any]] = None


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """递归合并两层字典，override 中的值优先。"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """加载配置文件并应用环境变量覆盖。

    Args:
        config_path: yaml 配置文件路径，默认为 assets/duqc.yaml

    Returns:
        合并后的配置字典
    """
    path = config_path or DEFAULT_CONFIG_PATH
    data: Dict[str, Any] = {}
    if os.path.exists(path):
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            logger.error(f"配置文件解析失败 {path}: {e}")
            data = {}
    else:
        logger.warning(f"配置文件不存在，使用内置默认值: {path}")

    config = _merge(_FALLBACK, data)

    env_cap = os.environ.get(ENV_ORACLE_CAP)
    if env_cap:
        try:
            config['oracle']['qubit_cap'] = int(env_cap)
        except ValueError:
            logger.warning(f"忽略非法的 {ENV_ORACLE_CAP}={env_cap!r}")
    return config


def get_config() -> Dict[str, Any]:
    """返回进程内缓存的配置。"""
    global _config
    if _config is None:
        _config = load_config()
    return _config


def reset_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """重新加载配置（测试与 CLI 覆盖参数时使用）。"""
    global _config
    _config = load_config(config_path)
    return _config


def override(section: str, key: str, value: Any):
    """在运行期覆盖单个配置项。

    Args:
        section: 配置分组名，如 'oracle'
        key: 分组内的键
        value: 新值
    """
    config = get_config()
    config.setdefault(section, {})[key] = value


def tolerance(name: str = 'unitarity') -> float:
    return float(get_config()['tolerance'][name])


def oracle_cap() -> int:
    return int(get_config()['oracle']['qubit_cap'])


def setup_logging(level: int = logging.INFO):
    """统一的日志格式，CLI 入口调用一次。"""
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
