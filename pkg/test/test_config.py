# test/test_config.py
"""配置加载：yaml 合并、兜底值与环境变量覆盖。"""

from duqc.config import get_config, load_config, oracle_cap, override, reset_config, tolerance


def test_defaults_match_assets():
    config = get_config()
    assert config['oracle']['qubit_cap'] == 24
    assert config['oracle']['qubit_cap_2d'] == 20
    assert config['fast_path']['delta'] == 0.1
    assert config['folded_transfer']['max_t'] == 4
    assert tolerance('compare') == 1e-10


def test_partial_yaml_is_merged(tmp_path):
    path = tmp_path / 'duqc.yaml'
    path.write_text("oracle:\n  qubit_cap: 10\nfast_path:\n  delta: 0.25\n", encoding='utf-8')
    config = reset_config(str(path))
    assert config['oracle']['qubit_cap'] == 10
    assert config['oracle']['assemble_cap'] == 12
    assert config['fast_path']['delta'] == 0.25
    assert config['fast_path']['budget_prefactor'] == 2.0


def test_missing_or_broken_yaml_falls_back(tmp_path):
    assert load_config(str(tmp_path / 'missing.yaml'))['oracle']['qubit_cap'] == 24
    path = tmp_path / 'broken.yaml'
    path.write_text("oracle: [unclosed\n", encoding='utf-8')
    assert load_config(str(path))['tolerance']['unitarity'] == 1e-10


def test_environment_cap(monkeypatch):
    monkeypatch.setenv('DUQC_ORACLE_CAP', '8')
    reset_config()
    assert oracle_cap() == 8
    monkeypatch.setenv('DUQC_ORACLE_CAP', 'many')
    reset_config()
    assert oracle_cap() == 24


def test_override():
    override('oracle', 'qubit_cap', 6)
    assert oracle_cap() == 6
    reset_config()
    assert oracle_cap() == 24
