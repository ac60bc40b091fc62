"""System model, subproblems, alternating algorithm and Monte Carlo harness."""

from .network_model import ChannelSet, NetworkSolution, SystemConfig
from .orchestrate import AlgorithmOptions, alternating_optimize, run_method

__all__ = ["AlgorithmOptions", "ChannelSet", "NetworkSolution", "SystemConfig", "alternating_optimize", "run_method"]
