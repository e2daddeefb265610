"""Spectral Galerkin simulator and verification harness for the modified
Constantin-Johnson troposphere model on the strip (-pi, pi) x (0, pi).

Modules
-------
spectral   basis, transforms, derivative operators, snapshot files
dynamics   model parameters, forcing, nonlinearity, IMEX steppers, tensor oracle
analysis   norms, inequality suite, growth fits, regime classification
scenarios  declarative experiments, run directories, checkpoint/resume
cli        ``troposim`` command line
"""
from .dynamics import (DivergenceError, ForcingSpec, ModelParams, StepperConfig,
                       galerkin_tensor, integrate, nonlinearity_B, rhs, rhs_oracle)
from .spectral import ConfigurationError, SpectralField, Truncation
from .analysis import check_inequalities, classify_regime, run_identity_suite
from .scenarios import Scenario, load_config, run_scenario, resume_scenario

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DivergenceError", "ForcingSpec", "ModelParams", "Scenario",
    "SpectralField", "StepperConfig", "Truncation", "check_inequalities",
    "classify_regime", "galerkin_tensor", "integrate", "load_config", "nonlinearity_B",
    "resume_scenario", "rhs", "rhs_oracle", "run_identity_suite", "run_scenario",
]
