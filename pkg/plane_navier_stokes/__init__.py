from plane_navier_stokes import radial_grid, spectral, operators, nonlinear, profiles, solver, verify
from plane_navier_stokes import cli
