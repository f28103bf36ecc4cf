"""Pilot sequence design and SINR analysis for multi-cell multiuser massive MIMO.

The package designs user-capacity-achieving pilot books together with a
downlink power allocation that meets every user's SINR requirement, provides
the equal-correlation (WBE) and orthogonal-reuse (FOS) baselines, evaluates
closed-form and Monte Carlo SINR, capacity regions and minimum antenna
counts, and persists everything as plot-ready CSV files.
"""

__version__ = "0.1.0"

from .baselines import BaselineMeta, fos_pilots, wbe_pilots
from .capacity import (
    RegionCheck,
    boundary_surface,
    effective_bandwidth,
    max_sinr_solve,
    region_check,
    region_volume,
    sinr_pattern,
    user_capacity_bound,
    welch_trace_bound,
    weighted_welch_trace,
)
from .gwbe import CellDesign, design_cell, design_network, gamma_hat
from .link import (
    SinrReport,
    allocate_power,
    compute_alpha,
    min_antennas,
    min_antennas_fos_closed_form,
    min_antennas_wbe_closed_form,
    sinr_asymptotic,
    sinr_finite,
)
from .majorize import TransformChain, majorizes, t_transform_chain, uniform_majorant
from .model import (
    DegeneratePivotError,
    FeasibilityError,
    NetworkConfig,
    PilotBook,
    PowerAllocation,
    SinrTargets,
    UserIndex,
    flat_index,
    unflatten_index,
)
from .montecarlo import ChannelRealization, MonteCarloReport, ls_estimate, mrt_precoder, simulate
from .scenario_io import Scenario, load_scenario, scenario_hash, write_scenario, write_tables

__all__ = [
    "__version__",
    "BaselineMeta", "fos_pilots", "wbe_pilots",
    "RegionCheck", "boundary_surface", "effective_bandwidth", "max_sinr_solve",
    "region_check", "region_volume", "sinr_pattern", "user_capacity_bound",
    "welch_trace_bound", "weighted_welch_trace",
    "CellDesign", "design_cell", "design_network", "gamma_hat",
    "SinrReport", "allocate_power", "compute_alpha", "min_antennas",
    "min_antennas_fos_closed_form", "min_antennas_wbe_closed_form",
    "sinr_asymptotic", "sinr_finite",
    "TransformChain", "majorizes", "t_transform_chain", "uniform_majorant",
    "DegeneratePivotError", "FeasibilityError", "NetworkConfig", "PilotBook",
    "PowerAllocation", "SinrTargets", "UserIndex", "flat_index", "unflatten_index",
    "ChannelRealization", "MonteCarloReport", "ls_estimate", "mrt_precoder", "simulate",
    "Scenario", "load_scenario", "scenario_hash", "write_scenario", "write_tables",
]
