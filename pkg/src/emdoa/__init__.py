"""Maximum-likelihood DOA estimation in unknown uniform noise with EM, MEM and SAGE."""
from .em import (EmDetState, EmStoState, em_det_estep, em_det_iteration, em_det_mstep,
                 em_sto_estep, em_sto_iteration, em_sto_mstep)
from .geometry import (ArrayGeometry, Direction, ProjectionStats, load_geometry,
                       projection_stats, steering_matrix, steering_vector, unit_direction)
from .likelihood import DetParams, StoParams, build_cov, loglik_det, loglik_sto
from .mem import (MemDetState, MemStoState, mem_det_estep, mem_det_iteration, mem_det_mstep,
                  mem_sto_estep, mem_sto_iteration, mem_sto_mstep)
from .runner import (ConfigError, ExperimentConfig, MonteCarloResult, RealizationResult,
                     classify_wanted, figure_config, monte_carlo, reproduce_figure, run_solver,
                     save_monte_carlo, simulate)
from .sage import (SageDetState, SageStoState, sage_det_substep, sage_iteration,
                   sage_sto_substep)
from .search import LineSearchParams, ascend, grid_init, objective_and_gradient
from .signals import (gen_deterministic, gen_stochastic, load_snapshots, rng_stream,
                      sample_covariance, save_snapshots)

__version__ = "0.1.0"

__all__ = [
    "EmDetState",
    "EmStoState",
    "em_det_estep",
    "em_det_iteration",
    "em_det_mstep",
    "em_sto_estep",
    "em_sto_iteration",
    "em_sto_mstep",
    "ArrayGeometry",
    "Direction",
    "ProjectionStats",
    "load_geometry",
    "projection_stats",
    "steering_matrix",
    "steering_vector",
    "unit_direction",
    "DetParams",
    "StoParams",
    "build_cov",
    "loglik_det",
    "loglik_sto",
    "MemDetState",
    "MemStoState",
    "mem_det_estep",
    "mem_det_iteration",
    "mem_det_mstep",
    "mem_sto_estep",
    "mem_sto_iteration",
    "mem_sto_mstep",
    "ConfigError",
    "ExperimentConfig",
    "MonteCarloResult",
    "RealizationResult",
    "classify_wanted",
    "figure_config",
    "monte_carlo",
    "reproduce_figure",
    "run_solver",
    "save_monte_carlo",
    "simulate",
    "SageDetState",
    "SageStoState",
    "sage_det_substep",
    "sage_iteration",
    "sage_sto_substep",
    "LineSearchParams",
    "ascend",
    "grid_init",
    "objective_and_gradient",
    "gen_deterministic",
    "gen_stochastic",
    "load_snapshots",
    "rng_stream",
    "sample_covariance",
    "save_snapshots",
]
