"""Scenario configuration: types, validation and the JSON document format.

A configuration document is a JSON object::

    {
      "name": "my-run",
      "dimension": 2,
      "mesh": {"cells": [14, 14], "spacing": [0.0714, 0.0714]},
      "material": {"rho0": 997, "gamma": 6, "a_tilde": 3.041e4, "b": 3.0397e4},
      "gravity": {"enabled": true},
      "constraints": {
        "r": 0,
        "contacts": [
          {"type": "floor", "height": 0.0, "stiffness": 4.8e10},
          {"type": "box", "lower": [2.5, -0.5], "upper": [3.0, 0.3], "stiffness": 4.8e6}
        ]
      },
      "dt": 1e-3,
      "steps": 6000,
      "integrator": {"type": "explicit"},
      "initial": {"type": "perturbation", "nodes": [[4, 0], [5, 1]], "fraction": 0.01},
      "output": {"snapshot_stride": 100, "diagnostics_stride": 10}
    }

Only ``mesh``, ``material``, ``dt`` and ``steps`` are required.  The mesh
may be given by ``extent`` instead of ``cells``.  ``material`` accepts
either ``a`` or ``a_tilde``.  With ``"gravity": {"enabled": true}`` (or
simply ``true``) the default field of 9.81 m/s^2 towards ``-y`` (2D) or
``-z`` (3D) is used; a ``vector`` entry overrides it.  Gravity vectors
follow the potential convention ``Pi = g . phi``: the body acceleration
is ``-vector``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import BoxContact, ConstraintSet, HalfSpaceContact, IncompressibilityPenalty
from .dynamics import FluidModel, SolverSettings, assemble_lumped_mass, bootstrap_pair
from .errors import ConfigError
from .grid import Mesh, mesh_from_extent
from .kinematics import StatePair
from .material import GravitySpec, MaterialParams

STANDARD_GRAVITY = 9.81


def default_gravity(dim: int) -> GravitySpec:
    g = [0.0] * dim
    g[-1] = STANDARD_GRAVITY
    return GravitySpec(tuple(g))


# -- initial conditions ----------------------------------------------------------


@dataclass(frozen=True)
class AtRest:
    """Reference configuration with zero velocity."""

    level_offset = -1

    def initial_pair(self, mesh: Mesh, dt: float) -> StatePair:
        x = mesh.reference_positions.astype(float)
        return bootstrap_pair(x, np.zeros_like(x), dt)

    def to_dict(self) -> dict:
        return {"type": "at-rest"}


@dataclass(frozen=True)
class NodeDisplacement:
    """Displacements applied at the first time level.

    The initial pair is ``(X, X + d)`` where ``d`` is nonzero only at the
    listed nodes, i.e. the displaced nodes start with velocity ``d / dt``.
    """

    level_offset = 0

    displacements: tuple = ()

    def __post_init__(self):
        items = tuple(
            (tuple(int(i) for i in node), tuple(float(x) for x in disp))
            for node, disp in self.displacements
        )
        for _, disp in items:
            if not np.all(np.isfinite(disp)):
                raise ValueError("displacements must be finite")
        object.__setattr__(self, "displacements", items)

    def validate(self, mesh: Mesh) -> None:
        for node, disp in self.displacements:
            if len(disp) != mesh.dim:
                raise ValueError(f"displacement {disp} has wrong dimension")
            mesh.node_id(node)

    def initial_pair(self, mesh: Mesh, dt: float) -> StatePair:
        self.validate(mesh)
        x0 = mesh.reference_positions.astype(float)
        x1 = x0.copy()
        for node, disp in self.displacements:
            x1[mesh.node_id(node)] += disp
        return StatePair(x0, x1, dt, (x1 - x0) / dt)

    def to_dict(self) -> dict:
        return {
            "type": "displacement",
            "nodes": [{"node": list(n), "displacement": list(d)} for n, d in self.displacements],
        }


@dataclass(frozen=True)
class InwardPerturbation:
    """Small compression: listed nodes move by ``fraction * ds`` along the inward diagonal.

    The inward direction along each axis is ``+1`` for nodes in the lower half
    of the lattice and ``-1`` otherwise; ``ds`` is the smallest spacing.
    """

    level_offset = 0

    nodes: tuple = ()
    fraction: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(tuple(int(i) for i in n) for n in self.nodes))
        if not (np.isfinite(self.fraction) and self.fraction >= 0):
            raise ValueError("perturbation fraction must be non-negative")

    def as_displacement(self, mesh: Mesh) -> NodeDisplacement:
        out = []
        for node in self.nodes:
            mesh.node_id(node)
            sign = np.array([1.0 if 2 * i < c else -1.0 for i, c in zip(node, mesh.cells)])
            disp = self.fraction * min(mesh.spacing) * sign / np.sqrt(mesh.dim)
            out.append((node, tuple(disp)))
        return NodeDisplacement(tuple(out))

    def initial_pair(self, mesh: Mesh, dt: float) -> StatePair:
        return self.as_displacement(mesh).initial_pair(mesh, dt)

    def to_dict(self) -> dict:
        return {"type": "perturbation", "nodes": [list(n) for n in self.nodes], "fraction": self.fraction}


@dataclass(frozen=True)
class BoundaryVelocityProfile:
    """Initial velocity ``intercept + slope * i`` on one boundary face.

    Parameters
    ----------
    axis : int
        The face is ``index[axis] == 0`` (``side="lower"``) or the last
        lattice index (``side="upper"``).
    index_axis : int
        Lattice axis whose index ``i`` enters the profile.
    slope, intercept : tuple of float
        Velocity coefficients (m/s per lattice index and m/s).
    scale : float
        Extra multiplier, used to match total momentum across resolutions.
    depth : float, optional
        When given, every node whose reference distance to the face is at
        most ``depth`` receives the profile, not just the face itself.
    index_spacing : float, optional
        When given, ``i`` is the continuous coordinate ``X[index_axis] /
        index_spacing`` instead of the lattice index, which keeps the
        profile fixed in space when the mesh is refined.
    """

    level_offset = -1

    axis: int = 1
    side: str = "lower"
    index_axis: int = 0
    slope: tuple = (0.0, 0.0)
    intercept: tuple = None
    scale: float = 1.0
    depth: float | None = None
    index_spacing: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "slope", tuple(float(x) for x in self.slope))
        if self.intercept is None:
            object.__setattr__(self, "intercept", (0.0,) * len(self.slope))
        object.__setattr__(self, "intercept", tuple(float(x) for x in self.intercept))
        if self.side not in ("lower", "upper"):
            raise ValueError(f"side must be 'lower' or 'upper', got {self.side!r}")
        if len(self.intercept) != len(self.slope):
            raise ValueError("slope and intercept differ in dimension")
        if not (np.all(np.isfinite(self.slope)) and np.all(np.isfinite(self.intercept))):
            raise ValueError("velocity coefficients must be finite")

    def velocity(self, mesh: Mesh) -> np.ndarray:
        if len(self.slope) != mesh.dim or not (0 <= self.axis < mesh.dim and 0 <= self.index_axis < mesh.dim):
            raise ValueError("velocity profile does not match the mesh dimension")
        idx = mesh.node_indices
        level = 0 if self.side == "lower" else mesh.cells[self.axis]
        if self.depth is None:
            on_face = idx[:, self.axis] == level
        else:
            dist = np.abs(idx[:, self.axis] - level) * mesh.spacing[self.axis]
            on_face = dist <= self.depth * (1 + 1e-9)
        v = np.zeros((mesh.n_nodes, mesh.dim))
        if self.index_spacing is None:
            i = idx[on_face, self.index_axis][:, None]
        else:
            i = mesh.reference_positions[on_face, self.index_axis][:, None] / self.index_spacing
        v[on_face] = self.scale * (np.asarray(self.intercept) + np.asarray(self.slope) * i)
        return v

    def initial_pair(self, mesh: Mesh, dt: float) -> StatePair:
        return bootstrap_pair(mesh.reference_positions.astype(float), self.velocity(mesh), dt)

    def to_dict(self) -> dict:
        return {
            "type": "boundary-velocity",
            "axis": self.axis,
            "side": self.side,
            "index_axis": self.index_axis,
            "slope": list(self.slope),
            "intercept": list(self.intercept),
            "scale": self.scale,
            **({"depth": self.depth} if self.depth is not None else {}),
            **({"index_spacing": self.index_spacing} if self.index_spacing is not None else {}),
        }


InitialCondition = AtRest | NodeDisplacement | InwardPerturbation | BoundaryVelocityProfile


# -- scenario ----------------------------------------------------------------------


@dataclass(frozen=True)
class OutputSpec:
    snapshot_stride: int = 100
    diagnostics_stride: int = 10
    directory: str | None = None

    def __post_init__(self):
        if self.snapshot_stride < 1 or self.diagnostics_stride < 1:
            raise ValueError("output strides must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one simulation run."""

    mesh: Mesh
    material: MaterialParams
    dt: float
    steps: int
    name: str = "scenario"
    gravity: GravitySpec | None = None
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    integrator: str = "explicit"
    solver: SolverSettings = field(default_factory=SolverSettings)
    initial: InitialCondition = field(default_factory=AtRest)
    output: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        if self.gravity is None:
            object.__setattr__(self, "gravity", GravitySpec.none(self.mesh.dim))
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))
        if self.integrator not in ("explicit", "midpoint"):
            raise ValueError(f"integrator must be 'explicit' or 'midpoint', got {self.integrator!r}")
        if len(self.gravity.g) != self.mesh.dim:
            raise ValueError("gravity vector dimension does not match the mesh")
        for c in self.constraints.contacts:
            n = len(c.normal) if isinstance(c, HalfSpaceContact) else len(c.lower)
            if n != self.mesh.dim:
                raise ValueError("contact geometry dimension does not match the mesh")
        if hasattr(self.initial, "validate"):
            self.initial.validate(self.mesh)
        elif isinstance(self.initial, InwardPerturbation):
            self.initial.as_displacement(self.mesh)
        elif isinstance(self.initial, BoundaryVelocityProfile):
            self.initial.velocity(self.mesh)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def duration(self) -> float:
        return self.dt * self.steps

    def model(self) -> FluidModel:
        return FluidModel(self.mesh, self.material, self.gravity, self.constraints)

    def initial_pair(self) -> StatePair:
        """Starting pair of the integrators.

        Velocity-type initial conditions give ``(phi^{-1}, phi^0)``,
        displacement-type ones ``(phi^0, phi^1)``; ``initial.level_offset``
        is the time level of ``prev`` (``-1`` or ``0``).
        """
        return self.initial.initial_pair(self.mesh, self.dt)

    def initial_momentum(self) -> np.ndarray:
        pair = self.initial_pair()
        return (assemble_lumped_mass(self.mesh, self.material)[:, None] * pair.velocity).sum(0)

    def with_overrides(self, **kwargs) -> ScenarioConfig:
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        contacts = []
        for c in self.constraints.contacts:
            if isinstance(c, HalfSpaceContact):
                contacts.append(
                    {"type": "half-space", "normal": list(c.normal), "offset": c.offset, "stiffness": c.stiffness}
                )
            else:
                contacts.append(
                    {"type": "box", "lower": list(c.lower), "upper": list(c.upper), "stiffness": c.stiffness}
                )
        integrator = {"type": self.integrator}
        if self.integrator == "midpoint":
            integrator.update(
                tolerance=self.solver.tolerance,
                max_iterations=self.solver.max_iterations,
                jacobian_mode=self.solver.jacobian_mode,
            )
        out = {
            "name": self.name,
            "dimension": self.dim,
            "mesh": {"cells": list(self.mesh.cells), "spacing": list(self.mesh.spacing)},
            "material": {
                "rho0": self.material.rho0,
                "gamma": self.material.gamma,
                **(
                    {"a_tilde": self.material.scaled_a}
                    if self.material.scaled_a is not None
                    else {"a": self.material.a_coeff}
                ),
                "b": self.material.b_coeff,
            },
            "gravity": {"enabled": not self.gravity.is_zero, "vector": list(self.gravity.g)},
            "constraints": {"r": self.constraints.incompressibility.r, "contacts": contacts},
            "dt": self.dt,
            "steps": self.steps,
            "integrator": integrator,
            "initial": self.initial.to_dict(),
            "output": {
                "snapshot_stride": self.output.snapshot_stride,
                "diagnostics_stride": self.output.diagnostics_stride,
            },
        }
        if self.output.directory is not None:
            out["output"]["directory"] = self.output.directory
        return out


# -- parsing -----------------------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return doc[key]


def _as_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def _parse_mesh(doc, dim):
    doc = _as_mapping(doc, "mesh")
    spacing = _require(doc, "spacing", "mesh")
    if "cells" in doc:
        mesh = Mesh(tuple(doc["cells"]), tuple(spacing))
    elif "extent" in doc:
        mesh = mesh_from_extent(doc["extent"], spacing)
    else:
        raise ConfigError("mesh: needs either 'cells' or 'extent'")
    if dim is not None and mesh.dim != dim:
        raise ConfigError(f"mesh: dimension {mesh.dim} does not match 'dimension' {dim}")
    return mesh


def _parse_material(doc):
    doc = _as_mapping(doc, "material")
    rho0 = float(_require(doc, "rho0", "material"))
    gamma = float(_require(doc, "gamma", "material"))
    b = float(doc.get("b", 0.0))
    if "a" in doc and "a_tilde" in doc:
        raise ConfigError("material: give either 'a' or 'a_tilde', not both")
    if "a_tilde" in doc:
        return MaterialParams.from_a_tilde(rho0, gamma, float(doc["a_tilde"]), b)
    return MaterialParams(rho0, gamma, float(doc.get("a", 0.0)), b)


def _parse_gravity(doc, dim):
    if doc is None or doc is False:
        return GravitySpec.none(dim)
    if doc is True:
        return default_gravity(dim)
    doc = _as_mapping(doc, "gravity")
    if not doc.get("enabled", True):
        return GravitySpec.none(dim)
    if "vector" in doc:
        vec = tuple(doc["vector"])
        if len(vec) != dim:
            raise ConfigError(f"gravity: vector must have {dim} components")
        return GravitySpec(vec)
    return default_gravity(dim)


def _parse_contact(doc, i, dim):
    doc = _as_mapping(doc, f"constraints.contacts[{i}]")
    kind = doc.get("type")
    k = float(_require(doc, "stiffness", f"constraints.contacts[{i}]"))
    if kind in ("half-space", "floor"):
        if kind == "floor":
            return HalfSpaceContact.floor(dim, float(doc.get("height", 0.0)), k)
        return HalfSpaceContact(tuple(doc["normal"]), float(doc.get("offset", 0.0)), k)
    if kind == "box":
        return BoxContact(tuple(doc["lower"]), tuple(doc["upper"]), k)
    raise ConfigError(f"constraints.contacts[{i}]: unknown contact type {kind!r}")


def _parse_initial(doc):
    if doc is None:
        return AtRest()
    doc = _as_mapping(doc, "initial")
    kind = doc.get("type", "at-rest")
    if kind == "at-rest":
        return AtRest()
    if kind == "displacement":
        return NodeDisplacement(tuple((d["node"], d["displacement"]) for d in doc.get("nodes", [])))
    if kind == "perturbation":
        return InwardPerturbation(tuple(doc.get("nodes", [])), float(doc.get("fraction", 0.01)))
    if kind == "boundary-velocity":
        return BoundaryVelocityProfile(
            axis=int(doc.get("axis", 1)),
            side=doc.get("side", "lower"),
            index_axis=int(doc.get("index_axis", 0)),
            slope=tuple(_require(doc, "slope", "initial")),
            intercept=tuple(doc["intercept"]) if "intercept" in doc else None,
            scale=float(doc.get("scale", 1.0)),
            depth=float(doc["depth"]) if "depth" in doc else None,
            index_spacing=float(doc["index_spacing"]) if "index_spacing" in doc else None,
        )
    raise ConfigError(f"initial: unknown initial condition type {kind!r}")


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Validate a configuration document and fill in defaults.

    Raises
    ------
    ConfigError
        On missing fields, wrong types or invalid values.
    """
    doc = _as_mapping(doc, "config")
    try:
        dim = doc.get("dimension")
        dim = None if dim is None else int(dim)
        if dim not in (None, 2, 3):
            raise ConfigError(f"dimension must be 2 or 3, got {dim}")
        mesh = _parse_mesh(_require(doc, "mesh", "config"), dim)
        material = _parse_material(_require(doc, "material", "config"))
        gravity = _parse_gravity(doc.get("gravity"), mesh.dim)
        cons = _as_mapping(doc.get("constraints", {}), "constraints")
        constraints = ConstraintSet(
            IncompressibilityPenalty(float(cons.get("r", 0.0))),
            tuple(_parse_contact(c, i, mesh.dim) for i, c in enumerate(cons.get("contacts", []))),
        )
        integ = doc.get("integrator", {"type": "explicit"})
        if isinstance(integ, str):
            integ = {"type": integ}
        integ = _as_mapping(integ, "integrator")
        solver = SolverSettings(
            tolerance=float(integ.get("tolerance", 1e-10)),
            max_iterations=int(integ.get("max_iterations", 50)),
            jacobian_mode=integ.get("jacobian_mode", "auto"),
        )
        out = _as_mapping(doc.get("output", {}), "output")
        output = OutputSpec(
            snapshot_stride=int(out.get("snapshot_stride", 100)),
            diagnostics_stride=int(out.get("diagnostics_stride", 10)),
            directory=out.get("directory"),
        )
        steps = _require(doc, "steps", "config")
        if isinstance(steps, float) and not steps.is_integer():
            raise ConfigError(f"steps must be an integer, got {steps}")
        return ScenarioConfig(
            mesh=mesh,
            material=material,
            dt=float(_require(doc, "dt", "config")),
            steps=int(steps),
            name=str(doc.get("name", "scenario")),
            gravity=gravity,
            constraints=constraints,
            integrator=integ.get("type", "explicit"),
            solver=solver,
            initial=_parse_initial(doc.get("initial")),
            output=output,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def parse_config(path) -> ScenarioConfig:
    """Read a JSON configuration file, or a builtin scenario by name."""
    from .scenarios import BUILTINS, builtin

    if str(path) in BUILTINS:
        return builtin(str(path))
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such file or builtin scenario") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)
