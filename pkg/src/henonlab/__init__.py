"""Numerical laboratory for the critical fractional Henon equation.

The radial problem on (0, inf) is studied through its Emden-Fowler image on
the line: a translation-invariant nonlocal equation whose kernel, constants,
ground states, linearized spectra, and continuation branch in s are all
computed here with independent cross-checks.
"""

from .continuation import (
    BranchPoint,
    ContinuationOptions,
    continue_branch,
    endpoint_soliton,
)
from .grids import LogGrid
from .kernel import A_via_integral, KernelTable, kernel_table, kernel_value
from .operator import OperatorMatrix, assemble_T, rayleigh_form, symbol_error, symbol_errors
from .params import (
    Params,
    admissible,
    critical_exponent,
    hardy_constant,
    normalization_constant,
    power_symbol,
)
from .solver import SolveOptions, nehari_scale, residual_norm, solve_ground_state
from .spectrum import (
    SpectrumReport,
    assemble_linearized,
    dp_invariant_check,
    morse_index,
    parity_spectrum,
    sign_changes,
    singular_map,
)
from .transform import (
    Profile,
    decay_rate_fit,
    from_log_profile,
    generator_z,
    to_log_profile,
)

__version__ = "0.1.0"

__all__ = [
    "A_via_integral",
    "BranchPoint",
    "ContinuationOptions",
    "KernelTable",
    "LogGrid",
    "OperatorMatrix",
    "Params",
    "Profile",
    "SolveOptions",
    "SpectrumReport",
    "admissible",
    "assemble_T",
    "assemble_linearized",
    "continue_branch",
    "critical_exponent",
    "decay_rate_fit",
    "dp_invariant_check",
    "endpoint_soliton",
    "from_log_profile",
    "generator_z",
    "hardy_constant",
    "kernel_table",
    "kernel_value",
    "morse_index",
    "nehari_scale",
    "normalization_constant",
    "parity_spectrum",
    "power_symbol",
    "rayleigh_form",
    "residual_norm",
    "sign_changes",
    "singular_map",
    "solve_ground_state",
    "symbol_error",
    "symbol_errors",
    "to_log_profile",
]
