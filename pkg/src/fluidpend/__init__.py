"""Rigid pendulum with a fluid-filled circular cavity.

Simulates the coupled motion of a swinging rigid body and the viscous
barotropic gas inside its cavity, with an incompressible comparison solver
and a steady-state (equilibrium orientation) analyzer.
"""

from .compressible import (
    CompressibleSolver,
    CoupledStateSnapshot,
    FluidState,
    GasParams,
    discrete_energy,
    total_mass,
)
from .config import RunConfig, load_config
from .driver import damping_metric, experiment1, experiment2, run_simulation
from .errors import (
    ConfigError,
    FluidPendError,
    InvalidParameterError,
    MeshFormatError,
    NonManifoldError,
    OrientationError,
    SolverError,
)
from .fem import CRField, P0Field
from .incompressible import IncompressibleSolver, IncompressibleState
from .mesh import Mesh, build_topology, generate_disk_mesh, load_mesh, save_mesh
from .rigid import BodyGeometry, BodyState, body_inertia, gravity_step, theta_from_g
from .steady import (
    CavityDescriptor,
    SteadyState,
    density_profile,
    find_equilibria,
    select_minimizer,
    solve_mass_constant,
    steady_energy,
    steady_first_moment,
)

__version__ = "0.1.0"

__all__ = [
    "BodyGeometry", "BodyState", "CRField", "CavityDescriptor",
    "CompressibleSolver", "ConfigError", "CoupledStateSnapshot", "FluidPendError",
    "FluidState", "GasParams", "IncompressibleSolver", "IncompressibleState",
    "InvalidParameterError", "Mesh", "MeshFormatError", "NonManifoldError",
    "OrientationError", "P0Field", "RunConfig", "SolverError", "SteadyState",
    "body_inertia", "build_topology", "damping_metric", "density_profile",
    "discrete_energy", "experiment1", "experiment2", "find_equilibria",
    "generate_disk_mesh", "gravity_step", "load_config", "load_mesh",
    "run_simulation", "save_mesh", "select_minimizer", "solve_mass_constant",
    "steady_energy", "steady_first_moment", "theta_from_g", "total_mass",
]
