"""Builtin scenarios and convergence studies.

Nominal spacings such as 0.0714 m or 0.333 m are realised as the exact
fraction of the domain size (1/14 m, 1/3 m, ...) so that every mesh covers
its domain with an integer number of cells.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .config import (
    AtRest,
    BoundaryVelocityProfile,
    InwardPerturbation,
    OutputSpec,
    ScenarioConfig,
    default_gravity,
)
from .constraints import BoxContact, ConstraintSet, HalfSpaceContact, IncompressibilityPenalty
from .dynamics import SolverSettings
from .grid import Mesh
from .material import GravitySpec, MaterialParams

RHO0 = 997.0
A_TILDE = 3.041e4
B_COEFF = 3.0397e4

# Initial compression of the perturbed nodes, as a fraction of the spacing.
PERTURBATION_FRACTION = 0.01


def water(gamma: float = 6.0) -> MaterialParams:
    """The barotropic water-like law used throughout the examples."""
    return MaterialParams.from_a_tilde(RHO0, gamma, A_TILDE, B_COEFF)


def example1(r: float = 0.0) -> ScenarioConfig:
    """Free square of fluid (1 m x 1 m) released after a tiny compression."""
    dt = 5e-4 if r >= 1e7 else 1e-3
    return ScenarioConfig(
        name="example1-baro" if r == 0 else f"example1-r{r:.0e}".replace("+0", ""),
        mesh=Mesh((14, 14), (1 / 14, 1 / 14)),
        material=water(),
        dt=dt,
        steps=round(6.0 / dt),
        constraints=ConstraintSet(IncompressibilityPenalty(r)),
        initial=InwardPerturbation(((4, 0), (5, 1)), PERTURBATION_FRACTION),
    )


def example2(r: float = 0.0) -> ScenarioConfig:
    """Column of fluid (2 m x 0.4 m) collapsing on a floor towards a rigid block.

    The block occupies x in [2.5, 3.0], 0.5 m downstream of the fluid's
    right edge, and rises 0.3 m above the floor; it extends below the floor
    so that its lower face never competes with the side faces.
    """
    return ScenarioConfig(
        name="example2-impact" if r == 0 else f"example2-impact-r{r:.0e}".replace("+0", ""),
        mesh=Mesh((32, 12), (0.0625, 0.4 / 12)),
        material=water(),
        dt=1e-4 if r == 0 else 1e-5,
        steps=20000 if r == 0 else 200000,
        gravity=default_gravity(2),
        constraints=ConstraintSet(
            IncompressibilityPenalty(r),
            (
                HalfSpaceContact.floor(2, 0.0, 4.8e10),
                BoxContact((2.5, -0.5), (3.0, 0.3), 4.8e6),
            ),
        ),
        initial=AtRest(),
        output=OutputSpec(snapshot_stride=1000, diagnostics_stride=100),
    )


def example3(r: float = 0.0) -> ScenarioConfig:
    """Free cube of fluid (2 m per side) released after a tiny compression."""
    return ScenarioConfig(
        name="example3-baro" if r == 0 else f"example3-r{r:.0e}".replace("+0", ""),
        mesh=Mesh((6, 6, 6), (1 / 3, 1 / 3, 1 / 3)),
        material=water(),
        dt=1e-3,
        steps=3000,
        constraints=ConstraintSet(IncompressibilityPenalty(r)),
        initial=InwardPerturbation(((1, 0, 1), (1, 0, 2)), PERTURBATION_FRACTION),
    )


def example4() -> ScenarioConfig:
    """Block of fluid (1.6 x 1 x 0.4 m) collapsing on a floor towards a wall."""
    return ScenarioConfig(
        name="example4-impact",
        mesh=Mesh((16, 5, 4), (0.1, 0.2, 0.1)),
        material=water(gamma=7.0),
        dt=5e-5,
        steps=28000,
        gravity=default_gravity(3),
        constraints=ConstraintSet(
            IncompressibilityPenalty(0.0),
            (
                HalfSpaceContact.floor(3, 0.0, 5e9),
                BoxContact((2.1, -0.5, -0.5), (2.6, 1.5, 0.3), 5e9),
            ),
        ),
        initial=AtRest(),
        output=OutputSpec(snapshot_stride=2000, diagnostics_stride=200),
    )


def free_flow_2d(spacing: float = 0.4 / 7, dt: float = 5e-3, t_final: float = 0.25) -> ScenarioConfig:
    """0.4 m square in vacuum, bottom edge launched with ``v_a = (0, 0.163 a)``."""
    n = round(0.4 / spacing)
    return ScenarioConfig(
        name="conv2d-free",
        mesh=Mesh((n, n), (0.4 / n, 0.4 / n)),
        material=water(),
        dt=dt,
        steps=round(t_final / dt),
        integrator="midpoint",
        solver=SolverSettings(),
        initial=BoundaryVelocityProfile(axis=1, side="lower", index_axis=0, slope=(0.0, 0.163)),
    )


def surface_flow_3d(spacing: float = 0.1, dt: float = 2.5e-4, t_final: float = 0.5) -> ScenarioConfig:
    """0.4 m cube released at rest on a floor under gravity."""
    n = round(0.4 / spacing)
    return ScenarioConfig(
        name="conv3d-surface",
        mesh=Mesh((n, n, n), (0.4 / n,) * 3),
        material=water(),
        dt=dt,
        steps=round(t_final / dt),
        gravity=default_gravity(3),
        constraints=ConstraintSet(
            IncompressibilityPenalty(0.0), (HalfSpaceContact.floor(3, 0.0, 3e7),)
        ),
        initial=AtRest(),
    )


@dataclass(frozen=True)
class StudySpec:
    """Protocol of one convergence study: levels, reference and comparison time."""

    base: ScenarioConfig
    axis: str
    levels: tuple
    reference: float
    t_final: float


STUDIES = {
    ("conv2d-free", "time"): StudySpec(
        free_flow_2d(), "time", (5e-3, 2.5e-3, 1.25e-3, 6.25e-4), 3.125e-4, 0.25
    ),
    ("conv2d-free", "space"): StudySpec(
        free_flow_2d(spacing=0.4, dt=2e-3, t_final=0.1), "space", (0.4, 0.2, 0.1, 0.05), 0.025, 0.1
    ),
    ("conv3d-surface", "time"): StudySpec(
        surface_flow_3d(), "time", (2.5e-4, 1.25e-4, 6.25e-5, 3.125e-5), 7.8125e-6, 0.5
    ),
    ("conv3d-surface", "space"): StudySpec(
        surface_flow_3d(spacing=0.2, dt=3.125e-5, t_final=0.1),
        "space",
        (0.2, 0.1, 0.05, 0.025),
        0.0125,
        0.1,
    ),
}


BUILTINS = {
    "example1-baro": lambda: example1(0.0),
    "example1-r1e6": lambda: example1(1e6),
    "example1-r1e7": lambda: example1(1e7),
    "example2-impact": lambda: example2(0.0),
    "example3-baro": lambda: example3(0.0),
    "example3-r1e5": lambda: example3(1e5),
    "example3-r1e7": lambda: example3(1e7),
    "example4-impact": example4,
    "conv2d-free": free_flow_2d,
    "conv3d-surface": surface_flow_3d,
}


def builtin(name: str) -> ScenarioConfig:
    """Look up a builtin scenario by name."""
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin scenario {name!r}; known: {', '.join(BUILTINS)}") from None


def study(name: str, axis: str) -> StudySpec:
    try:
        return STUDIES[(name, axis)]
    except KeyError:
        raise KeyError(f"no {axis} convergence study for {name!r}") from None


def without_gravity(config: ScenarioConfig) -> ScenarioConfig:
    return replace(config, gravity=GravitySpec.none(config.dim))
