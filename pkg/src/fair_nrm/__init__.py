"""Fairness-aware network revenue management with demand learning."""

from .config import ConfigError, ExperimentConfig, load_config
from .dual import DualConfig, DualState, eg_pm_update, estimated_subgradient, init_dual, online_regret_check
from .ellipsoid import EllipsoidProblem, EllipsoidResult, find_feasible
from .env import (
    Instance,
    InventoryState,
    ModelParams,
    NoiseSpec,
    consume,
    expected_demand,
    is_depleted,
    sample_demand,
)
from .estimator import (
    EstimatorState,
    SeparationResult,
    confidence_radii,
    kappa_value,
    new_state,
    observe,
    rls_fit,
    separation_oracle,
    solve_Mt,
)
from .experiment import ExperimentRow, read_rows, run_experiment, write_rows
from .fluid import FluidSolution, InfeasibleFluidError, metrics, regret_of, solve_fluid
from .policy import PolicyConfig, TrajectoryRecord, run_episode
from .primal import BoxQP, maximize_box_qp, primal_price_update
from .regularizers import (
    GroupMaxMin,
    LoadBalancing,
    RangeFairness,
    Regularizer,
    WeightedMaxMin,
    grid_conjugate_oracle,
    make_regularizer,
)

import types as _types

__all__ = [
    name
    for name, value in list(globals().items())
    if not name.startswith("_") and not isinstance(value, _types.ModuleType)
]
__version__ = "0.1.0"
