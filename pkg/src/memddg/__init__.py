"""Mechanochemical membrane dynamics on triangulated surfaces.

Discrete bending/tension/pressure energetics with exact shape derivatives,
protein-field coupling, gradient-flow and minimization solvers, adaptive
remeshing, and a validation harness with analytic references.
"""

from .config import dumps_config, parse_config, write_config
from .curvature import (
    curvature_vectors,
    vertex_gaussian_curvature,
    vertex_mean_curvature,
)
from .driver import RunResult, run_dynamics, run_preset
from .energy import EnergyBreakdown, total_energy
from .forces import chemical_potentials, force_breakdown
from .geometry import Measures, enclosed_volume, measure, mesh_statistics
from .halfedge import HalfedgeMesh, MeshError
from .meshgen import generate_mesh, hex_patch, icosphere, spheroid, tube
from .meshio import read_mesh, write_mesh
from .parameters import (
    BoundaryCondition,
    MembraneParameters,
    RemeshConfig,
    ReservoirSpec,
    SolverConfig,
)
from .presets import ScenarioPreset, make_preset, preset_names, realize
from .remesh import remesh_pass
from .solvers import (
    System,
    conjugate_gradient_minimize,
    evolve_protein,
    forward_euler_step,
    mechanochemical_step,
)
from .state import SystemState
from .trajectory import TrajectoryWriter, read_trajectory
from .validation import (
    SpheroidReference,
    scenario_assertions,
    spheroid_convergence_study,
    taylor_exactness_study,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "EnergyBreakdown",
    "HalfedgeMesh",
    "Measures",
    "MembraneParameters",
    "MeshError",
    "RemeshConfig",
    "ReservoirSpec",
    "RunResult",
    "ScenarioPreset",
    "SolverConfig",
    "SpheroidReference",
    "System",
    "SystemState",
    "TrajectoryWriter",
    "chemical_potentials",
    "conjugate_gradient_minimize",
    "curvature_vectors",
    "dumps_config",
    "enclosed_volume",
    "evolve_protein",
    "force_breakdown",
    "forward_euler_step",
    "generate_mesh",
    "hex_patch",
    "icosphere",
    "make_preset",
    "measure",
    "mechanochemical_step",
    "mesh_statistics",
    "parse_config",
    "preset_names",
    "read_mesh",
    "read_trajectory",
    "realize",
    "remesh_pass",
    "run_dynamics",
    "run_preset",
    "scenario_assertions",
    "spheroid",
    "spheroid_convergence_study",
    "taylor_exactness_study",
    "total_energy",
    "tube",
    "vertex_gaussian_curvature",
    "vertex_mean_curvature",
    "write_config",
    "write_mesh",
]
