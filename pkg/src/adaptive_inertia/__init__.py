"""Time-varying inertia control for linearised inertial Kuramoto networks."""

from .controller import AdaptiveInertia, ControllerConfig, baseline_inertia
from .dynamics import ConstantInertia, DisturbanceSpec, SimParams, simulate, simulate_nonlinear
from .metrics import balanced_fragility, compare, evaluate, fragility, relaxation_time
from .netgen import Network, generate, laplacian
from .spectral import decompose, project

__version__ = "0.1.0"

__all__ = [
    "AdaptiveInertia", "ConstantInertia", "ControllerConfig", "DisturbanceSpec", "Network",
    "SimParams", "balanced_fragility", "baseline_inertia", "compare", "decompose", "evaluate",
    "fragility", "generate", "laplacian", "project", "relaxation_time", "simulate",
    "simulate_nonlinear",
]
