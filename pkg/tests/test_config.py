import logging
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from core import config as config_module
from core import dnf, generators, influence, shifting
from core.boolean_function import BooleanFunction
from core.config import DEFAULT_CONFIG, get_config, load_config, max_n, reload_config
from core.custom_logger import customLogger
from core.errors import CubeLabError


@pytest.fixture(autouse=True)
def restore_config(monkeypatch):
    monkeypatch.delenv('CUBELAB_CONFIG', raising=False)
    monkeypatch.delenv('CUBELAB_MAX_N', raising=False)
    monkeypatch.delenv('CUBELAB_LOG_LEVEL', raising=False)
    yield
    monkeypatch.undo()
    reload_config()


def test_defaults_without_a_file(tmp_path):
    loaded = load_config(str(tmp_path / "absent.yml"))
    assert loaded['limits'] == DEFAULT_CONFIG['limits']
    assert loaded['sampling']['confidence'] == 0.999


def test_yaml_overrides_merge_into_defaults(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text("limits:\n  max_n: 16\nsampling:\n  workers: 3\n")
    loaded = load_config(str(path))
    assert loaded['limits']['max_n'] == 16
    assert loaded['limits']['dnf_oracle_max_n'] == DEFAULT_CONFIG['limits']['dnf_oracle_max_n']
    assert loaded['sampling']['workers'] == 3


def test_config_file_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "other.yml"
    path.write_text("sweep:\n  chunk_size: 10\n")
    monkeypatch.setenv('CUBELAB_CONFIG', str(path))
    assert reload_config()['sweep']['chunk_size'] == 10
    assert get_config()['sweep']['chunk_size'] == 10


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv('CUBELAB_MAX_N', '12')
    monkeypatch.setenv('CUBELAB_LOG_LEVEL', 'debug')
    monkeypatch.setenv('CUBELAB_LOG_TO_FILE', 'false')
    reload_config(str(tmp_path / "absent.yml"))
    assert max_n() == 12
    assert get_config()['logging']['level'] == 'debug'
    assert get_config()['logging']['to_file'] is False


def test_blank_environment_values_are_ignored(tmp_path, monkeypatch):
    monkeypatch.setenv('CUBELAB_MAX_N', '  ')
    assert load_config(str(tmp_path / "absent.yml"))['limits']['max_n'] == DEFAULT_CONFIG['limits']['max_n']


def test_invalid_configuration(tmp_path, monkeypatch):
    unknown = tmp_path / "unknown.yml"
    unknown.write_text("database:\n  host: localhost\n")
    with pytest.raises(ValueError):
        load_config(str(unknown))

    scalar = tmp_path / "scalar.yml"
    scalar.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        load_config(str(scalar))

    monkeypatch.setenv('CUBELAB_MAX_N', 'many')
    with pytest.raises(ValueError):
        load_config(str(tmp_path / "absent.yml"))

    monkeypatch.setenv('CUBELAB_MAX_N', '0')
    with pytest.raises(ValueError):
        load_config(str(tmp_path / "absent.yml"))


def test_repository_config_matches_defaults():
    path = os.path.join(os.path.dirname(config_module.__file__), '..', 'config.yml')
    assert load_config(path)['limits'] == DEFAULT_CONFIG['limits']


def test_custom_logger():
    logger = customLogger('test_config_logger')
    assert logger.name == 'test_config_logger'
    assert logger.handlers
    assert not logger.propagate
    assert customLogger('test_config_logger') is logger
    assert len(logger.handlers) == len(customLogger('test_config_logger').handlers)


def test_custom_logger_defaults_to_caller_module():
    assert customLogger().name == 'test_config.py'


def test_custom_logger_level(monkeypatch):
    monkeypatch.setenv('CUBELAB_LOG_LEVEL', 'WARNING')
    reload_config()
    assert customLogger('test_config_warning_logger').level == logging.WARNING


@pytest.mark.parametrize("module, call", [
    (generators, lambda: generators.FunctionSpec.parse("majority:n=4")),
    (influence, lambda: influence.decomposition_check(BooleanFunction.constant(1, 0), 1)),
    (shifting, lambda: shifting.compress_pipeline(BooleanFunction.constant(3, 1))),
    (dnf, lambda: dnf.truncate(dnf.Dnf.parse("1", 2), -1)),
])
def test_rejected_input_is_logged_before_raising(monkeypatch, caplog, module, call):
    monkeypatch.setattr(module.log, 'propagate', True)
    with caplog.at_level(logging.ERROR, logger=module.log.name):
        with pytest.raises(CubeLabError):
            call()
    assert any(r.name == module.log.name and r.levelno == logging.ERROR for r in caplog.records)
