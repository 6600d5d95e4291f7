"""Generalized mode decomposition by recursive diffeomorphism-based regression."""

from ._core import (
    builtin_shape,
    builtin_shape_names,
    convergence_rates,
    decompose,
    estimate_profiles,
    preset_names,
    regress,
    snr_db,
    synth,
    well_differentiation,
)

__all__ = [
    "builtin_shape",
    "builtin_shape_names",
    "convergence_rates",
    "decompose",
    "estimate_profiles",
    "preset_names",
    "regress",
    "snr_db",
    "synth",
    "well_differentiation",
]
