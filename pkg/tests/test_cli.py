# pylint: disable=redefined-outer-name

"""Tests for plane_navier_stokes.cli and the run configuration it reads."""

import json
import os

import numpy as np
import pytest
from .context import plane_navier_stokes

from plane_navier_stokes import cli, solver
from plane_navier_stokes.errors import ConfigError
from plane_navier_stokes.report import FIELD_FILENAME, MODES_FILENAME, REPORT_FILENAME
from plane_navier_stokes.run_config import load_config, parse_config


BACKGROUND = '''
[background]
family = "polynomial-bump"
r_star = 1.0
amplitude = 0.06
power = 2
'''

NUMERICS = '''
[numerics]
modes = 2
nodes = 128
r_max = 16.0
tol = 1e-8

[output]
field_extent = 2.0
field_points = 9
'''

PERTURBATION = '''
[[perturbation]]
n = 1
family = "power-law"
amplitude = 1e-4

[[perturbation]]
n = 2
family = "gaussian-bump"
amplitude = 1e-4
phase = 0.5
width = 1.5
'''


def write_config(directory, text):
    path = os.path.join(str(directory), 'config.toml')
    with open(path, 'w') as config_file:
        config_file.write(text)
    return path


def read_bytes(directory, filename):
    with open(os.path.join(str(directory), filename), 'rb') as artifact:
        return artifact.read()


@pytest.fixture
def quiet_config(tmp_path):
    return write_config(tmp_path, BACKGROUND + NUMERICS)


@pytest.fixture
def perturbed_config(tmp_path):
    return write_config(tmp_path, BACKGROUND + PERTURBATION + NUMERICS)

# --- TESTS --- #

def test_malformed_toml_reports_line(tmp_path):
    path = write_config(tmp_path, BACKGROUND + '\n[numerics\nmodes = 2\n')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line is not None
    assert str(info.value).startswith('line ')
    assert cli.main(['solve', '--config', path, '--out', str(tmp_path / 'out')]) == cli.EXIT_CONFIG


def test_missing_background_table(tmp_path):
    path = write_config(tmp_path, NUMERICS)
    assert cli.run_pipeline(path, str(tmp_path / 'out')) == cli.EXIT_CONFIG
    assert not os.path.exists(str(tmp_path / 'out'))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / 'absent.toml'))


def test_alpha_outside_decay_range(tmp_path, caplog):
    path = write_config(tmp_path, BACKGROUND + NUMERICS.replace('modes = 2', 'modes = 2\nalpha = 0.4'))
    assert cli.run_pipeline(path, str(tmp_path / 'out')) == cli.EXIT_CONFIG
    assert 'decay range' in caplog.text


@pytest.mark.parametrize('document', [
    {'background': {'family': 'top-hat', 'r_star': 1.0}},
    {'background': {'family': 'polynomial-bump', 'r_star': 0.5, 'amplitude': 0.06}},
    {'background': {'family': 'polynomial-bump', 'r_star': 1.0}},
    {'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 'large'}},
    {'background': {'family': 'piecewise-polynomial', 'r_star': 1.0, 'coefficients': [1.0, 0.0, 1.0]}},
    {'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 0.06},
     'perturbation': [{'n': 17, 'family': 'power-law', 'amplitude': 1e-4}]},
    {'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 0.06},
     'perturbation': [{'n': 0, 'family': 'power-law', 'amplitude': 1e-4, 'phase': 1.0}]},
    {'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 0.06},
     'numerics': {'kappa': 1.0}},
    {'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 0.06},
     'numerics': {'grading': 'chebyshev'}},
])
def test_parse_config_rejects(document):
    with pytest.raises(ConfigError):
        parse_config(document)


def test_parse_config_defaults():
    config = parse_config({'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 0.6}})
    assert config.perturbations == ()
    assert config.numerics.modes == 16
    assert config.numerics.nodes == 1024
    assert config.output.directory == 'output'
    assert config.background.radial_family().mass == pytest.approx(0.1)


def test_resolve_alpha():
    config = parse_config({'background': {'family': 'polynomial-bump', 'r_star': 1.0, 'amplitude': 0.6}})
    assert config.resolve_alpha(0.2) == pytest.approx(0.18)
    assert config.resolve_alpha(0.8) == pytest.approx(0.45)


def test_unperturbed_run_is_certified_and_reproducible(tmp_path, quiet_config):
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert cli.main(['solve', '--config', quiet_config, '--out', str(first)]) == cli.EXIT_OK
    assert cli.main(['solve', '--config', quiet_config, '--out', str(second)]) == cli.EXIT_OK
    for filename in (MODES_FILENAME, FIELD_FILENAME, REPORT_FILENAME):
        assert read_bytes(first, filename) == read_bytes(second, filename)
    with open(str(first / REPORT_FILENAME)) as report_file:
        report = json.load(report_file)
    assert report['status'] == 'converged'
    assert report['certified']
    assert report['norms']['w_U0'] == 0.0


def test_perturbed_run_and_verify(tmp_path, perturbed_config):
    out = str(tmp_path / 'out')
    assert cli.main(['solve', '--config', perturbed_config, '--out', out]) == cli.EXIT_OK
    with open(os.path.join(out, REPORT_FILENAME)) as report_file:
        report = json.load(report_file)
    assert report['certified']
    assert report['norms']['band_limited']
    assert report['norms']['w_U0'] > 0.0
    header = read_bytes(out, MODES_FILENAME).splitlines()[0]
    assert header == b'r,n,re_w,im_w,re_gamma,im_gamma'
    assert cli.main(['verify', '--out', out]) == cli.EXIT_OK


def test_divergent_run_writes_report(monkeypatch, tmp_path, perturbed_config):
    monkeypatch.setattr(solver, 'map_S', lambda w, sigma, bg, alpha: w.scaled(2.0))
    out = str(tmp_path / 'out')
    assert cli.main(['solve', '--config', perturbed_config, '--out', out]) == cli.EXIT_DIVERGED
    with open(os.path.join(out, REPORT_FILENAME)) as report_file:
        report = json.load(report_file)
    assert report['status'] == 'diverged'
    assert not report['certified']
    assert not os.path.exists(os.path.join(out, MODES_FILENAME))


def test_verify_without_outputs(tmp_path):
    assert cli.main(['verify', '--out', str(tmp_path / 'nothing')]) == cli.EXIT_CONFIG


def test_verify_prints_recomputed_rows(tmp_path, perturbed_config, capsys):
    out = str(tmp_path / 'out')
    assert cli.main(['solve', '--config', perturbed_config, '--out', out]) == cli.EXIT_OK
    capsys.readouterr()
    assert cli.main(['verify', '--out', out]) == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    names = [line.split()[0] + ' ' + line.split()[1] for line in lines if line.startswith(('matching', 'stream'))]
    assert names == ['matching value', 'matching derivative', 'stream n=0', 'stream n=1', 'stream n=2']
    assert not any(line.endswith('FAIL') for line in lines)


def test_verify_rejects_tampered_modes(tmp_path, perturbed_config, capsys):
    out = str(tmp_path / 'out')
    assert cli.main(['solve', '--config', perturbed_config, '--out', out]) == cli.EXIT_OK
    path = os.path.join(out, MODES_FILENAME)
    rows = np.loadtxt(path, delimiter=',', skiprows=1)
    tampered = (rows[:, 1] == 1) & (rows[:, 0] > 1.0)
    rows[tampered, 4] *= 1.1
    np.savetxt(path, rows, fmt='%.17g', delimiter=',', header='r,n,re_w,im_w,re_gamma,im_gamma', comments='')
    capsys.readouterr()
    assert cli.main(['verify', '--out', out]) == cli.EXIT_CONFIG
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith('stream n=1') and line.endswith('FAIL') for line in lines)


def test_amplified_data(tmp_path):
    path = write_config(tmp_path, BACKGROUND + PERTURBATION.replace('1e-4', '1e-1') + NUMERICS)
    out = str(tmp_path / 'out')
    code = cli.main(['solve', '--config', path, '--out', out])
    with open(os.path.join(out, REPORT_FILENAME)) as report_file:
        report = json.load(report_file)
    if code == cli.EXIT_DIVERGED:
        assert not report['certified']
    else:
        assert code == cli.EXIT_OK
        assert report['diagnostics']['residuals']['stream_max'] <= cli.RESIDUAL_TOL
        assert report['diagnostics']['residuals']['vorticity_max'] <= cli.RESIDUAL_TOL


def test_r_max_study(tmp_path):
    numerics = NUMERICS.replace('tol = 1e-8', 'tol = 1e-8\nr_max_study = [16.0, 24.0]')
    path = write_config(tmp_path, BACKGROUND + PERTURBATION + numerics)
    out = str(tmp_path / 'out')
    assert cli.main(['solve', '--config', path, '--out', out]) == cli.EXIT_OK
    with open(os.path.join(out, REPORT_FILENAME)) as report_file:
        rows = json.load(report_file)['r_max_study']
    assert [row['r_max'] for row in rows] == [16.0, 24.0]
    for row in rows:
        assert row['converged']
        assert row['decay_slope'] is not None
        assert row['w_U1'] > 0.0


def test_example_config_has_C2_background():
    config = load_config(os.path.join(os.path.dirname(__file__), '..', 'config.toml'))
    assert config.background.power >= 3.0
    assert config.background.radial_family().mass == pytest.approx(0.1)
    assert config.numerics.modes == 16
