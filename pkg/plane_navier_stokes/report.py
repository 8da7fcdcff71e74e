"""Run artifacts: modes.csv, field.csv and report.json."""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from plane_navier_stokes.errors import OutputError
from plane_navier_stokes.radial_grid import Grading, RadialGrid, RadialProfile
from plane_navier_stokes.spectral import FourierVector, angular_grid, spectral_tail


MODES_FILENAME = 'modes.csv'
FIELD_FILENAME = 'field.csv'
REPORT_FILENAME = 'report.json'

MODES_COLUMNS = ('r', 'n', 're_w', 'im_w', 're_gamma', 'im_gamma')
FIELD_COLUMNS = ('x1', 'x2', 'u1', 'u2', 'omega')

# Round-trip exact for doubles.
NUMBER_FORMAT = '%.17g'


def _finite(value) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def _clean(record):
    """JSON-safe copy: non-finite numbers become null, numpy scalars plain floats."""
    if isinstance(record, dict):
        return {str(k): _clean(v) for k, v in record.items()}
    if isinstance(record, (list, tuple)):
        return [_clean(v) for v in record]
    if isinstance(record, (bool, np.bool_)):
        return bool(record)
    if isinstance(record, (int, np.integer)):
        return int(record)
    if isinstance(record, (float, np.floating)):
        return _finite(record)
    return record


def grid_record(grid: RadialGrid) -> Dict[str, Any]:
    return {
        'nodes': grid.size,
        'r_star': grid.r_star,
        'r_star_index': grid.r_star_index,
        'r_max': grid.r_max,
        'grading': grid.grading.kind,
        'quadrature_order': grid.quadrature_order,
    }


def background_record(bg, N: int) -> Dict[str, Any]:
    return {
        'r_star': bg.r_star,
        'mu_star': bg.mu_star,
        'rho_star': bg.rho_star,
        'nu_star': bg.nu_star,
        'smallness': bg.smallness,
        'delta': bg.delta,
        'smallness_satisfied': bg.condition_satisfied,
        'zeta': {str(n): [z.real, z.imag] for n, z in bg.zeta_table(N).items()},
    }


def iteration_record(report) -> Dict[str, Any]:
    budget = report.budget
    return {
        'data_norm': report.data_norm,
        'iterations': report.iterations,
        'converged': report.converged,
        'diverged': report.diverged,
        'divergence_step': report.divergence_step,
        'steps': [{'iteration': s.iteration, 'norm': s.norm, 'increment': s.increment, 'ratio': s.ratio}
                  for s in report.steps],
        'budget': {
            'delta_config': budget.delta_config,
            'epsilon_config': budget.epsilon_config,
            'K1': budget.K1,
            'K2_nu': budget.K2_nu,
            'K3': budget.K3,
            'epsilon_estimate': budget.epsilon_estimate,
            'M_observed': budget.M_observed,
            'M_estimate': budget.M_estimate,
        },
    }


def diagnostics_record(solution, residuals, matching, decay, divergence: float,
                       consistency: float) -> Dict[str, Any]:
    return {
        'residuals': {
            'stream_max': residuals.stream_max,
            'vorticity_max': residuals.vorticity_max,
            'scale': residuals.scale,
            'stream': {str(n): v for n, v in sorted(residuals.stream.items())},
            'vorticity': {str(n): v for n, v in sorted(residuals.vorticity.items())},
        },
        'matching_gap': {'value': matching.value, 'derivative': matching.derivative,
                         'second': matching.second},
        'decay': {'alpha': decay.alpha_used, 'sup': decay.sup_value, 'slope': decay.fitted_slope,
                  'window': list(decay.window)},
        'divergence': divergence,
        'consistency_Gstar_H': consistency,
        'spectral_tail': {'w': spectral_tail(solution.w), 'gamma': spectral_tail(solution.gamma)},
    }


def _mode_rows(solution) -> np.ndarray:
    r = solution.grid.nodes
    blocks = []
    for n in range(solution.w.N + 1):
        w = solution.w.modes[n].values
        gamma = solution.gamma.modes[n].values
        blocks.append(np.column_stack([r, np.full(len(r), n), w.real, w.imag, gamma.real, gamma.imag]))
    return np.concatenate(blocks)


def _field_rows(solution, extent: float, points: int) -> np.ndarray:
    nodes = solution.grid.nodes <= extent
    columns = [c[nodes].ravel() for c in solution.cartesian(angular_grid(points))]
    return np.column_stack(columns)


def _write_table(path: str, rows: np.ndarray, columns: Tuple[str, ...]):
    np.savetxt(path, rows, fmt=NUMBER_FORMAT, delimiter=',', header=','.join(columns), comments='')


def emit_report(directory: str, summary: Dict[str, Any], solution=None,
                field_extent: float = 4.0, field_points: int = 41) -> List[str]:
    """
    Writes report.json and, when a solution is given, modes.csv and field.csv.
    Identical inputs produce identical bytes.
    """

    try:
        os.makedirs(directory, exist_ok=True)
        paths = []
        if solution is not None:
            paths.append(os.path.join(directory, MODES_FILENAME))
            _write_table(paths[-1], _mode_rows(solution), MODES_COLUMNS)
            paths.append(os.path.join(directory, FIELD_FILENAME))
            _write_table(paths[-1], _field_rows(solution, field_extent, field_points), FIELD_COLUMNS)
        paths.append(os.path.join(directory, REPORT_FILENAME))
        with open(paths[-1], 'w') as report_file:
            json.dump(_clean(summary), report_file, indent=2, sort_keys=True)
            report_file.write('\n')
    except OSError as e:
        raise OutputError('Failed to write run artifacts to {}: {}'.format(directory, e))
    for path in paths:
        logging.info('Wrote %s', path)
    return paths


def load_report(directory: str) -> Dict[str, Any]:
    try:
        with open(os.path.join(directory, REPORT_FILENAME), 'r') as report_file:
            return json.load(report_file)
    except (OSError, ValueError) as e:
        raise OutputError('Failed to read {} from {}: {}'.format(REPORT_FILENAME, directory, e))


def load_modes(directory: str, record: Dict[str, Any]) -> Tuple[FourierVector, FourierVector]:
    """(w, gamma) rebuilt as value-only profiles from modes.csv and the grid record of the report."""

    try:
        rows = np.loadtxt(os.path.join(directory, MODES_FILENAME), delimiter=',', skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise OutputError('Failed to read {} from {}: {}'.format(MODES_FILENAME, directory, e))
    size = record['nodes']
    if rows.shape[0] % size != 0 or rows.shape[1] != len(MODES_COLUMNS):
        raise OutputError('{} does not hold whole modes on {} nodes'.format(MODES_FILENAME, size))
    blocks = rows.reshape(-1, size, len(MODES_COLUMNS))
    grid = RadialGrid(blocks[0, :, 0].copy(), record['r_star_index'], Grading(record['grading']),
                      record['quadrature_order'])
    w = tuple(RadialProfile(grid, b[:, 2] + 1j * b[:, 3]) for b in blocks)
    gamma = tuple(RadialProfile(grid, b[:, 4] + 1j * b[:, 5]) for b in blocks)
    return FourierVector(w), FourierVector(gamma, derivative_only=True)
