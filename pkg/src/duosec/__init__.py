"""duosec: dual-UAV secure ISAC trajectory and beamformer planning."""

__version__ = "0.1.0"

from .baselines import SCHEMES, evaluate_scheme
from .bcd import SolutionPlan, run_bcd, straight_trajectory
from .beamforming import BeamformingPlan, solve_sc_beamforming
from .geometry import ChannelSet, build_channel_set
from .metrics import MetricsReport, evaluate
from .scenario import (
    AlgorithmParams,
    ScenarioConfig,
    default_scenario,
    load_scenario,
    save_scenario,
    validate_scenario,
)
from .sensing import (
    SensingAssignment,
    SensingInfeasibleError,
    greedy_select,
    plan_scs,
    solve_scs_beamforming,
    weighted_distances,
)
from .trajectory import Trajectory, optimize_trajectory, validate_trajectory

__all__ = [
    "AlgorithmParams",
    "BeamformingPlan",
    "ChannelSet",
    "MetricsReport",
    "SCHEMES",
    "ScenarioConfig",
    "SensingAssignment",
    "SensingInfeasibleError",
    "SolutionPlan",
    "Trajectory",
    "__version__",
    "build_channel_set",
    "default_scenario",
    "evaluate",
    "evaluate_scheme",
    "greedy_select",
    "load_scenario",
    "optimize_trajectory",
    "plan_scs",
    "run_bcd",
    "save_scenario",
    "solve_sc_beamforming",
    "solve_scs_beamforming",
    "straight_trajectory",
    "validate_scenario",
    "validate_trajectory",
    "weighted_distances",
]
