#!/usr/bin/python3

"""Command line entry point: solve, verify and oracle."""

import argparse
import logging
import logging.config
import os
import sys
from typing import Any, Dict, List

import yaml

from plane_navier_stokes.configure import get_config
from plane_navier_stokes.errors import ConfigError, DivergenceError, SolverError
from plane_navier_stokes.report import (
    background_record, diagnostics_record, emit_report, grid_record, iteration_record,
    load_modes, load_report)
from plane_navier_stokes.run_config import RunConfig, load_config
from plane_navier_stokes.solver import (
    ContractionBudget, background_from_phi, iterate_norm_spec, picard_solve, reconstruct_solution)
from plane_navier_stokes.verify import (
    MatchingGap, WeightedNormSpec, consistency_Gstar_H, decay_metric, divergence_modes,
    matching_gap, norm_weighted, residual_system, run_oracles, sampled_matching_gap,
    sampled_stream_residual)


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2

# Certification thresholds for a converged run.
RESIDUAL_TOL = 1e-5
MATCHING_TOL = 1e-6

# Reproduction tolerance of the verify verb.
REPRODUCTION_TOL = 1e-12

# Finite-difference recomputations from modes.csv in the verify verb.
SAMPLED_MATCHING_TOL = 1e-3
SAMPLED_RESIDUAL_TOL = 1e-2

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(message)s'


def setup_logging():
    """dictConfig from the installed logging.yml, or basicConfig at INFO without one."""
    try:
        config = get_config()
        logging_config_filename = os.path.expanduser(os.path.join(config['dir'], config['files']['logging']))
        with open(logging_config_filename, 'r') as logging_config_file:
            logging_config = yaml.load(logging_config_file, Loader=yaml.FullLoader)
        logging.config.dictConfig(logging_config)
    except (OSError, KeyError, ValueError, yaml.YAMLError) as e:
        logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
        logging.debug('No usable logging configuration (%s); logging to stderr', e)


def _value_norms(w, gamma, alpha: float, kappa: float) -> Dict[str, float]:
    spec = WeightedNormSpec('U', alpha + 2.0, kappa + 2.0, 0)
    return {'w_U0': norm_weighted(w, spec), 'gamma_U0': norm_weighted(gamma, spec)}


def _solve(config: RunConfig, r_max: float = None):
    """Grid, background, alpha and the Picard run for one R_max."""
    numerics = config.numerics
    grid = config.grid(r_max)
    try:
        bg = background_from_phi(config.forcing(grid), config.background.r_star, grid, numerics.delta)
    except SolverError as e:
        raise ConfigError('Inadmissible background: {}'.format(e))
    alpha = config.resolve_alpha(bg.rho_star)
    phi = config.perturbation(grid, alpha)
    budget = ContractionBudget(numerics.delta, numerics.epsilon)
    return grid, bg, alpha, phi, budget


def _r_max_study(config: RunConfig) -> List[Dict[str, Any]]:
    numerics = config.numerics
    rows = []
    for r_max in numerics.r_max_study:
        row = {'r_max': r_max}
        try:
            _, bg, alpha, phi, budget = _solve(config, r_max)
            w, report = picard_solve(phi, bg, numerics.tol, numerics.max_iter, alpha, numerics.kappa, budget)
            solution = reconstruct_solution(w, phi, bg, alpha)
            decay = decay_metric(solution, alpha)
            row.update(converged=report.converged,
                       w_U1=norm_weighted(w, iterate_norm_spec(alpha, numerics.kappa)),
                       decay_sup=decay.sup_value, decay_slope=decay.fitted_slope)
        except SolverError as e:
            logging.warning('R_max study at %s failed: %s', r_max, e)
            row.update(converged=False, error=str(e))
        rows.append(row)
    return rows


def run_pipeline(config_path: str, out_dir: str = None) -> int:
    """Solves the configured problem, certifies the result and writes the artifacts."""

    try:
        config = load_config(config_path)
        grid, bg, alpha, phi, budget = _solve(config)
    except ConfigError as e:
        logging.critical('Configuration error: %s', e)
        return EXIT_CONFIG

    numerics = config.numerics
    directory = out_dir if out_dir is not None else config.output.directory
    summary = {
        'grid': grid_record(grid),
        'background': background_record(bg, numerics.modes),
        'alpha': alpha,
        'kappa': numerics.kappa,
        'modes': numerics.modes,
        'tol': numerics.tol,
        'max_iter': numerics.max_iter,
    }

    try:
        w, report = picard_solve(phi, bg, numerics.tol, numerics.max_iter, alpha, numerics.kappa, budget)
    except DivergenceError as e:
        logging.critical('Iteration diverged: %s', e)
        summary.update(status='diverged', certified=False, iteration=iteration_record(e.report))
        emit_report(directory, summary)
        return EXIT_DIVERGED

    solution = reconstruct_solution(w, phi, bg, alpha)
    residuals = residual_system(solution.gamma, w, phi, bg, alpha, numerics.kappa)
    matching = matching_gap(w, 2) if w.N >= 2 else MatchingGap(0.0, 0.0, None)
    decay = decay_metric(solution, alpha)
    divergence = divergence_modes(solution)
    consistency = consistency_Gstar_H(solution.gamma, w, bg, alpha=alpha)

    certified = (report.converged
                 and residuals.stream_max <= RESIDUAL_TOL
                 and residuals.vorticity_max <= RESIDUAL_TOL
                 and matching.value <= MATCHING_TOL
                 and matching.derivative <= MATCHING_TOL)
    norms = _value_norms(w, solution.gamma, alpha, numerics.kappa)
    spec = iterate_norm_spec(alpha, numerics.kappa)
    norms.update(w_U1=norm_weighted(w, spec), phi_U1=norm_weighted(phi, spec), band_limited=True)
    summary.update(
        status='converged' if report.converged else 'not-converged',
        certified=certified,
        iteration=iteration_record(report),
        norms=norms,
        diagnostics=diagnostics_record(solution, residuals, matching, decay, divergence, consistency),
        r_max_study=_r_max_study(config))
    emit_report(directory, summary, solution, config.output.field_extent, config.output.field_points)

    if not certified:
        logging.warning('Run not certified: converged=%s residuals=(%.3e, %.3e) matching=(%s, %s)',
                        report.converged, residuals.stream_max, residuals.vorticity_max,
                        matching.value, matching.derivative)
        return EXIT_DIVERGED
    logging.info('Run certified after %d iterations', report.iterations)
    return EXIT_OK


def _print_row(name: str, emitted, recomputed: float, passed: bool):
    shown = 'null' if emitted is None else '{:.17g}'.format(emitted)
    print('{:<20} {:>24} {:>24.17g} {}'.format(name, shown, recomputed, 'pass' if passed else 'FAIL'))


def verify_outputs(out_dir: str) -> int:
    """
    Recomputes metrics from the emitted tables and compares them with report.json.

    Norms must reproduce to REPRODUCTION_TOL. The matching gap and the stream residual
    are recomputed from samples by finite differences and must stay within the
    sampled tolerances; the emitted analytic values are printed next to them.
    """

    record = load_report(out_dir)
    if 'norms' not in record:
        logging.critical('%s holds no solution (status %s)', out_dir, record.get('status'))
        return EXIT_CONFIG
    w, gamma = load_modes(out_dir, record['grid'])
    diagnostics = record['diagnostics']
    failed = False

    recomputed = _value_norms(w, gamma, record['alpha'], record['kappa'])
    for name, value in sorted(recomputed.items()):
        expected = record['norms'][name]
        gap = abs(value - expected) / max(abs(expected), 1e-300)
        passed = gap <= REPRODUCTION_TOL or value == expected
        failed = failed or not passed
        _print_row(name, expected, value, passed)

    if w.N >= 2:
        sampled = sampled_matching_gap(w[2])
        emitted = diagnostics['matching_gap']
        for part in ('value', 'derivative'):
            value = getattr(sampled, part)
            passed = value <= SAMPLED_MATCHING_TOL
            failed = failed or not passed
            _print_row('matching {}'.format(part), emitted[part], value, passed)

    emitted = diagnostics['residuals']['stream']
    for n, value in sorted(sampled_stream_residual(gamma, w).items()):
        passed = value <= SAMPLED_RESIDUAL_TOL
        failed = failed or not passed
        _print_row('stream n={}'.format(n), emitted.get(str(n)), value, passed)

    if failed:
        logging.error('Emitted tables in %s do not reproduce report.json', out_dir)
    return EXIT_CONFIG if failed else EXIT_OK


def run_oracle_table() -> int:
    rows = run_oracles()
    for row in rows:
        print('{:<32} {:>12.3e} {:>10.1e} {}'.format(row.name, row.value, row.tolerance,
                                                     'pass' if row.passed else 'FAIL'))
    return EXIT_OK if all(row.passed for row in rows) else EXIT_CONFIG


def main(argv: List[str] = None) -> int:
    parser = argparse.ArgumentParser(
        description='Constructive solver for stationary Navier-Stokes flows on the plane.')
    verbs = parser.add_subparsers(dest='verb', required=True)
    solve = verbs.add_parser('solve', help='solve the configured problem and write artifacts')
    solve.add_argument(
        '--config',
        metavar='PATH',
        required=True,
        help='TOML run configuration')
    solve.add_argument(
        '--out',
        metavar='DIR',
        help='output directory (overrides output.directory)')
    verify = verbs.add_parser('verify', help='recompute metrics from emitted tables')
    verify.add_argument(
        '--out',
        metavar='DIR',
        required=True,
        help='directory written by solve')
    verbs.add_parser('oracle', help='run the analytic oracle battery')
    args = vars(parser.parse_args(argv))

    try:
        if args['verb'] == 'solve':
            return run_pipeline(args['config'], args['out'])
        if args['verb'] == 'verify':
            return verify_outputs(args['out'])
        return run_oracle_table()
    except SolverError as e:
        logging.critical(e, exc_info=True)
        return EXIT_CONFIG


if __name__ == '__main__':
    setup_logging()
    sys.exit(main())
