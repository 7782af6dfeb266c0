"""Exponential SAV solvers for gradient flows.

Thin Python layer over the C++ core; arrays are indexed ``[y, x]``.
"""

from ._core import (
    BlowUpError,
    Config,
    ConfigError,
    InvalidArgument,
    RunAborted,
    __version__,
    bdf_table,
    convergence,
    free_energy,
    initial_condition,
    observed_rate,
    preset,
    preset_cahn_hilliard,
    run,
    u_poly,
)

__all__ = [
    "BlowUpError",
    "Config",
    "ConfigError",
    "InvalidArgument",
    "RunAborted",
    "__version__",
    "bdf_table",
    "convergence",
    "free_energy",
    "initial_condition",
    "observed_rate",
    "preset",
    "preset_cahn_hilliard",
    "run",
    "u_poly",
]
