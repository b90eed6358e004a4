# test/conftest.py
"""pytest 公共配置。"""

import os
import sys

import pytest

# 添加项目根目录到路径
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from duqc.config import reset_config  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_config(monkeypatch):
    """每个测试使用干净的默认配置。"""
    monkeypatch.delenv('DUQC_ORACLE_CAP', raising=False)
    reset_config()
    yield
    reset_config()
