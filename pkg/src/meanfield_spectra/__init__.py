"""Spectral gaps of mean-field O(n) spin models.

Three independent routes to the gap (exact diagonalization of the Ising
generator, eigenvalues of the renormalized Schroedinger operator, and
one-dimensional functional-inequality constants) plus the fits that turn
gap-versus-N series into exponents and rates.
"""

from .potential import ModelParams, RegimeError, critical_field, critical_points, well_depth
from .ising import MagnetizationChain, GapEstimate, chain_gap, full_gap, trial_rayleigh
from .measures import RenormalizedMeasure, laplace_expectation, magnetization_gap_bound
from .schrodinger import OperatorSpec, SpectrumResult, limit_operator, solve_polynomial, solve_renormalized
from .funcineq import IneqConstants, muckenhoupt, bobkov_gotze, sandwich_check, transfer_constants
from .scaling import GapSeries, FitResult, fit_constant, fit_exponential_rate, fit_power_law

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "RegimeError", "critical_field", "critical_points", "well_depth",
    "MagnetizationChain", "GapEstimate", "chain_gap", "full_gap", "trial_rayleigh",
    "RenormalizedMeasure", "laplace_expectation", "magnetization_gap_bound",
    "OperatorSpec", "SpectrumResult", "limit_operator", "solve_polynomial", "solve_renormalized",
    "IneqConstants", "muckenhoupt", "bobkov_gotze", "sandwich_check", "transfer_constants",
    "GapSeries", "FitResult", "fit_constant", "fit_exponential_rate", "fit_power_law",
]
