# pylint: disable=redefined-outer-name

"""Tests for plane_navier_stokes.configure and the logging bootstrap that reads it."""

import json
import logging
import os

import pytest
from .context import plane_navier_stokes

from plane_navier_stokes import cli
from plane_navier_stokes.configure import DEFAULTS, Configure, get_config, meta_path


@pytest.fixture
def home(tmp_path, monkeypatch):
    monkeypatch.setenv('HOME', str(tmp_path))
    return tmp_path


@pytest.fixture
def logging_yml(tmp_path):
    path = tmp_path / 'logging.yml'
    path.write_text(
        'version: 1\n'
        'disable_existing_loggers: false\n'
        'handlers:\n'
        '  console:\n'
        '    class: logging.StreamHandler\n'
        '    level: WARNING\n'
        'root:\n'
        '  level: WARNING\n'
        '  handlers: [console]\n')
    return str(path)


@pytest.fixture
def restore_root_logger():
    root = logging.getLogger()
    level, handlers = root.level, list(root.handlers)
    yield
    root.setLevel(level)
    root.handlers[:] = handlers

# --- TESTS --- #

def test_configure_default_directory(home, logging_yml):
    Configure({'config_dir': DEFAULTS['config']['dir'], 'logging_config': logging_yml})
    config = get_config()
    assert config['files']['logging'] == 'logging.yml'
    assert os.path.isfile(str(home / '.plane_navier_stokes' / 'logging.yml'))


def test_configure_custom_directory_leaves_pointer(home, logging_yml):
    custom = str(home / 'elsewhere')
    Configure({'config_dir': custom, 'logging_config': logging_yml})
    assert get_config(custom) == get_config()
    with open(meta_path()) as meta_file:
        assert json.load(meta_file)['dir'] == custom


def test_get_config_without_install(home):
    with pytest.raises(OSError):
        get_config()


def test_setup_logging_reads_installed_file(home, logging_yml, restore_root_logger):
    Configure({'config_dir': DEFAULTS['config']['dir'], 'logging_config': logging_yml})
    cli.setup_logging()
    assert logging.getLogger().level == logging.WARNING


def test_setup_logging_without_install(home, restore_root_logger):
    cli.setup_logging()
    assert logging.getLogger().handlers
