"""Existence, uniqueness and construction of stationary solutions of multivariate ARMA equations."""
from .arma1q import Arma1qModel, check_existence_1q, solution_coeffs_1q
from .armapq import ArmapqModel, check_causal, check_existence_pq, check_weak, solution_coeffs_pq
from .noise import Component, NoiseModel
from .report import StationarityReport, Tolerances
from .sim import SimConfig, residual_check, simulate_path

__all__ = [
    "Arma1qModel",
    "ArmapqModel",
    "Component",
    "NoiseModel",
    "SimConfig",
    "StationarityReport",
    "Tolerances",
    "check_causal",
    "check_existence_1q",
    "check_existence_pq",
    "check_weak",
    "residual_check",
    "simulate_path",
    "solution_coeffs_1q",
    "solution_coeffs_pq",
]
__version__ = "0.1.0"
