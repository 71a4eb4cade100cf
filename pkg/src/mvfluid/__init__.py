"""Multisymplectic variational integrator for Lagrangian barotropic fluids.

The fluid is a structured mesh of material nodes; each cell carries
discrete deformation gradients at its corners.  Forces are derived from a
discrete potential (internal energy, gravity, penalties), so the explicit
integrator conserves the discrete linear and angular momentum maps exactly.
"""

from .app import RunResult, run_convergence_study, run_scenario
from .config import (
    AtRest,
    BoundaryVelocityProfile,
    InwardPerturbation,
    NodeDisplacement,
    OutputSpec,
    ScenarioConfig,
    config_from_dict,
    parse_config,
)
from .constraints import BoxContact, ConstraintSet, HalfSpaceContact, IncompressibilityPenalty
from .diagnostics import ConvergenceReport, convergence_rates, l2_error, momentum_map
from .dynamics import (
    FluidModel,
    SolverSettings,
    assemble_lumped_mass,
    nodal_forces,
    step_explicit,
    step_implicit_midpoint,
)
from .errors import ConfigError, NoConvergence, NonFiniteState, NonPositiveJacobian
from .grid import Mesh, Mesh2D, Mesh3D
from .kinematics import StatePair
from .material import GravitySpec, MaterialParams
from .scenarios import builtin

__all__ = [
    "AtRest",
    "BoundaryVelocityProfile",
    "BoxContact",
    "ConfigError",
    "ConstraintSet",
    "ConvergenceReport",
    "FluidModel",
    "GravitySpec",
    "HalfSpaceContact",
    "IncompressibilityPenalty",
    "InwardPerturbation",
    "MaterialParams",
    "Mesh",
    "Mesh2D",
    "Mesh3D",
    "NoConvergence",
    "NodeDisplacement",
    "NonFiniteState",
    "NonPositiveJacobian",
    "OutputSpec",
    "RunResult",
    "ScenarioConfig",
    "SolverSettings",
    "StatePair",
    "assemble_lumped_mass",
    "builtin",
    "config_from_dict",
    "convergence_rates",
    "l2_error",
    "momentum_map",
    "nodal_forces",
    "parse_config",
    "run_convergence_study",
    "run_scenario",
    "step_explicit",
    "step_implicit_midpoint",
]

__version__ = "0.1.0"
