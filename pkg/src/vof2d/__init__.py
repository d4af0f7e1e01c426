"""Two-dimensional volume-of-fluid composition tracking for Stokes convection."""
import os

# the bundled TBB is too old for numba; pick OpenMP unless told otherwise
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from .advect import BoundednessError, CFLError, VofField, strang_step  # noqa: E402
from .coupling import Simulation, impes_step, project_dg_q1  # noqa: E402
from .elvira import reconstruct_cell, reconstruct_field  # noqa: E402
from .grid import RefinementParams, StructuredGrid, flag_refinement, remesh_interval  # noqa: E402
from .plic import InterfaceLine, distance_from_fraction, volume_fraction  # noqa: E402
from .scenarios import ScenarioConfig, build, default_config  # noqa: E402
from .stokes import StaggeredFlow, StokesSolver  # noqa: E402
from .thermal import TemperatureField, ThermalSolver  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "BoundednessError", "CFLError", "InterfaceLine", "RefinementParams", "ScenarioConfig",
    "Simulation", "StaggeredFlow", "StokesSolver", "StructuredGrid", "TemperatureField",
    "ThermalSolver", "VofField", "build", "default_config", "distance_from_fraction",
    "flag_refinement", "impes_step", "project_dg_q1", "reconstruct_cell", "reconstruct_field",
    "remesh_interval", "strang_step", "volume_fraction",
]
