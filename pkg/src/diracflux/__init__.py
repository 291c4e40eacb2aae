"""Solver and audit suite for scalar conservation laws with bounded flux
and point masses in the initial data."""

__version__ = "0.1.0"

from .flux_model import FluxModel, godunov_flux, make_builtin, numerical_flux
from .measure_state import (
    Atom,
    MeasureState,
    RegularField,
    build_initial_state,
    l1_norm_regular,
    singular_parts,
    total_mass,
)

__all__ = [
    "FluxModel",
    "make_builtin",
    "numerical_flux",
    "godunov_flux",
    "Atom",
    "RegularField",
    "MeasureState",
    "build_initial_state",
    "total_mass",
    "singular_parts",
    "l1_norm_regular",
    "__version__",
]
