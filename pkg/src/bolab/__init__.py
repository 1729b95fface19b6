"""Numerical laboratory for soliton resolution in the Benjamin-Ono equation."""

from .errors import (BlowUpError, BolabError, ConfigParseError, DegenerateSpectrumError,
                     GridDecayError, GridMismatchError, IllConditionedError,
                     InvalidParameterError, NonconvergenceError, PreconditionError)
from .field_grid import HardyField, RealField, SpatialGrid, make_grid, szego_project
from .data import gaussian, multi_soliton, soliton
from .spectrum import SpectrumData, discrete_spectrum
from .scattering import LambdaGrid, ScatteringData, radiation_field, scattering_data
from .explicit_evolution import field_at_time, omega_eval
from .reference_solver import StepperConfig, step_evolve
from .resolution import ResolutionReport, remainder_report

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "BolabError", "ConfigParseError", "DegenerateSpectrumError",
    "GridDecayError", "GridMismatchError", "IllConditionedError", "InvalidParameterError",
    "NonconvergenceError", "PreconditionError",
    "HardyField", "RealField", "SpatialGrid", "make_grid", "szego_project",
    "gaussian", "multi_soliton", "soliton",
    "SpectrumData", "discrete_spectrum",
    "LambdaGrid", "ScatteringData", "radiation_field", "scattering_data",
    "field_at_time", "omega_eval",
    "StepperConfig", "step_evolve",
    "ResolutionReport", "remainder_report",
]
