"""Simulation and analysis of a continuous-variable Peres-Mermin contextuality test."""

__version__ = "0.1.0"

from .algebra import (
    DisplacementProduct,
    PMSquare,
    PauliSquare,
    SquareParams,
    build_pauli_square,
    build_pm_square,
    compose,
    context_product,
    contexts,
    exchange_phase,
    kappa_ideal,
)
from .analysis import NC_BOUND, QUANTUM_MAX, evaluate_L, significance
from .circuits import ExperimentConfig, run_commutativity_suite, run_pm_experiment
from .gaussian import GaussianState
from .noise import NoiseModel
