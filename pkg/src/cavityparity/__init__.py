"""Simulation and verification toolkit for macroscopically heralded
parity measurements on atomic qubits in an optical cavity.

Layers:
  - full model: two driven three-level atoms coupled to a damped cavity
    mode, simulated by the quantum-jump (Monte-Carlo wave-function) method;
  - effective model: adiabatically eliminated ground-state dynamics with
    the three macroscopic fluorescence levels D / L / H;
  - analytics: closed-form fidelity and success-probability predictions
    plus independent quadrature and Markov-chain oracles;
  - cluster: exact small-register cluster-state fusion and growth
    resource accounting.
"""

from .analytics import f_av, f_av_eta, p_suc, p_suc_eta, robust_f_av
from .cluster import (ClusterState, FusionResult, GrowthStats,
                      GrowthStrategy, fuse_2d, fuse_linear, graph_state,
                      growth_monte_carlo, linear_cluster, parity_project)
from .config import ExperimentConfig, parse_config, serialize_config
from .effective import (SUBSPACE_D, SUBSPACE_H, SUBSPACE_L,
                        build_effective_model, subspace_populations)
from .errors import (CapacityError, CavityParityError, ConfigError,
                     NumericalError, SingularDetuningError)
from .fullmodel import build_full_model, ground_state_vector
from .master import evolve_master, evolve_master_series
from .operators import Model, OperatorMatrix, ResetOperator
from .params import (EffectiveRates, MarkovRates, SystemParams,
                     effective_rates)
from .protocols import (ProtocolConfig, ProtocolContext, ProtocolOutcome,
                        parity_targets, run_double_herald,
                        run_protocol_ensemble, run_simple_protocol)
from .trajectory import (DetectorModel, TrajectoryRecord, run_ensemble,
                         run_trajectory, trajectory_rng)

__version__ = "1.0.0"

__all__ = [
    "CapacityError", "CavityParityError", "ClusterState", "ConfigError",
    "DetectorModel", "EffectiveRates", "ExperimentConfig", "FusionResult",
    "GrowthStats", "GrowthStrategy", "MarkovRates", "Model",
    "NumericalError", "OperatorMatrix", "ProtocolConfig", "ProtocolContext",
    "ProtocolOutcome", "ResetOperator", "SingularDetuningError",
    "SUBSPACE_D", "SUBSPACE_H", "SUBSPACE_L", "SystemParams",
    "TrajectoryRecord", "build_effective_model", "build_full_model",
    "effective_rates", "evolve_master", "evolve_master_series", "f_av",
    "f_av_eta", "fuse_2d", "fuse_linear", "graph_state",
    "ground_state_vector", "growth_monte_carlo", "linear_cluster",
    "parity_project", "parity_targets", "p_suc", "p_suc_eta",
    "robust_f_av", "run_double_herald", "run_ensemble",
    "run_protocol_ensemble", "run_simple_protocol", "run_trajectory",
    "subspace_populations", "trajectory_rng",
]
