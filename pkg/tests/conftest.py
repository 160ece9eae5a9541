import numpy as np
import pytest

from henonlab import Params, assemble_T, kernel_table, solve_ground_state
from henonlab.grids import LogGrid


@pytest.fixture(scope="session")
def sech_setup():
    """Closed-form case (N=3, s=1/2, alpha=0, p=2) on the production grid."""
    par = Params(N=3, s=0.5, alpha=0.0)
    grid = LogGrid(L=18.0, M=2001)
    table = kernel_table(par, grid, 1e-10)
    op = assemble_T(par, grid, table)
    prof = solve_ground_state(par, grid, opmatrix=op)
    return par, grid, table, op, prof


@pytest.fixture(scope="session")
def small_setup():
    """Same case on a small grid for cheap unit tests."""
    par = Params(N=3, s=0.5, alpha=0.0)
    grid = LogGrid(L=12.0, M=601)
    table = kernel_table(par, grid, 1e-10)
    op = assemble_T(par, grid, table)
    prof = solve_ground_state(par, grid, opmatrix=op)
    return par, grid, table, op, prof


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
