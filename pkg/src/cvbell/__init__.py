"""Bell-CHSH and Bell-CH nonlocality tests for continuous-variable states."""
from .bell import BellResult, BellSettings
from .fock import FockCutoff, FockOperator, SingleModeState, TwoModeState
from .observables import DisplacementSetting, ProjectorSetting, PseudospinSetting
from .optimize import OptimizeSpec, optimize, sweep
from .problems import bell_problem

__version__ = "0.1.0"

__all__ = [
    "BellResult",
    "BellSettings",
    "DisplacementSetting",
    "FockCutoff",
    "FockOperator",
    "OptimizeSpec",
    "ProjectorSetting",
    "PseudospinSetting",
    "SingleModeState",
    "TwoModeState",
    "bell_problem",
    "optimize",
    "sweep",
]
