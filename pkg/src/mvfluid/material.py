"""Barotropic constitutive law and per-cell energy densities.

The internal energy per unit mass, as a function of the Jacobian ``J`` of
the deformation, is

    W(J) = A / (gamma - 1) * (J / rho0) ** (1 - gamma) + B * J / rho0

and the associated material pressure is ``P = -rho0 dW/dJ
= A (rho0 / J) ** gamma - B``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Mesh
from .kinematics import StatePair


@dataclass(frozen=True)
class MaterialParams:
    """Constitutive constants of a barotropic fluid.

    Parameters
    ----------
    rho0 : float
        Reference density (per area in 2D, per volume in 3D).
    gamma : float
        Adiabatic exponent, ``> 1``.
    a_coeff : float
        The coefficient ``A``.
    b_coeff : float
        The coefficient ``B`` (Pa).
    scaled_a : float, optional
        The scaled coefficient ``A~ = A rho0**gamma`` when the law was given
        in that form; pressures are then evaluated as ``A~ J**-gamma - B`` so
        that ``P(1) = A~ - B`` holds to the last bit.
    """

    rho0: float
    gamma: float
    a_coeff: float
    b_coeff: float
    scaled_a: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.rho0) and self.rho0 > 0):
            raise ValueError(f"rho0 must be positive, got {self.rho0}")
        if not (np.isfinite(self.gamma) and self.gamma > 1):
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not (np.isfinite(self.a_coeff) and self.a_coeff >= 0):
            raise ValueError(f"A must be non-negative, got {self.a_coeff}")
        if not (np.isfinite(self.b_coeff) and self.b_coeff >= 0):
            raise ValueError(f"B must be non-negative, got {self.b_coeff}")

    @classmethod
    def from_a_tilde(cls, rho0: float, gamma: float, a_tilde: float, b_coeff: float):
        """Build from the scaled coefficient ``A~`` with ``A = A~ rho0**-gamma``."""
        return cls(rho0, gamma, a_tilde * rho0 ** (-gamma), b_coeff, float(a_tilde))

    @property
    def a_tilde(self) -> float:
        if self.scaled_a is not None:
            return self.scaled_a
        return self.a_coeff * self.rho0**self.gamma


@dataclass(frozen=True)
class GravitySpec:
    """Gravitational potential ``Pi(phi) = g . phi`` per unit mass.

    With this convention the body acceleration is ``-g``, so a field pulling
    towards ``-y`` is written ``g = (0, 9.81)``.
    """

    g: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(x) for x in self.g)
        if not all(np.isfinite(g)):
            raise ValueError(f"gravity components must be finite, got {g}")
        object.__setattr__(self, "g", g)

    @classmethod
    def none(cls, dim: int) -> GravitySpec:
        return cls((0.0,) * dim)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.g)

    @property
    def is_zero(self) -> bool:
        return not any(self.g)


def _check_domain(J):
    J = np.asarray(J, dtype=float)
    if np.any(~(J > 0)):
        raise ValueError("Jacobian must be positive")
    return J


def internal_energy(mat: MaterialParams, J):
    """Specific internal energy ``W(rho0, J)``; raises ``ValueError`` for ``J <= 0``."""
    J = _check_domain(J)
    if mat.scaled_a is not None:
        return mat.scaled_a / ((mat.gamma - 1.0) * mat.rho0) * J ** (1.0 - mat.gamma) + mat.b_coeff * J / mat.rho0
    s = J / mat.rho0
    return mat.a_coeff / (mat.gamma - 1.0) * s ** (1.0 - mat.gamma) + mat.b_coeff * s


def pressure(mat: MaterialParams, J):
    """Material pressure ``A (rho0 / J)**gamma - B``."""
    J = _check_domain(J)
    if mat.scaled_a is not None:
        return mat.scaled_a * J ** (-mat.gamma) - mat.b_coeff
    return mat.a_coeff * (mat.rho0 / J) ** mat.gamma - mat.b_coeff


def pressure_derivative(mat: MaterialParams, J):
    """``dP/dJ``."""
    J = _check_domain(J)
    return -mat.gamma * mat.a_tilde * J ** (-mat.gamma - 1.0)


def cell_internal_energy(mat: MaterialParams, jacobians) -> float:
    """Corner average of ``W`` over the Jacobians of one cell."""
    return float(np.mean(internal_energy(mat, jacobians)))


cell_internal_energy_2d = cell_internal_energy
cell_internal_energy_3d = cell_internal_energy


def cell_kinetic_energy(pair: StatePair, mesh: Mesh, cell) -> float:
    """Corner average of ``|v|**2 / 2`` over one cell (per unit mass)."""
    v = pair.velocity[mesh.cell_node_ids[mesh.cell_id(cell)]]
    return float(0.5 * np.mean(np.sum(v * v, axis=-1)))


def cell_potential_energy(grav: GravitySpec, positions: np.ndarray, mesh: Mesh, cell) -> float:
    """Corner average of ``g . phi`` over one cell (per unit mass)."""
    x = positions[mesh.cell_node_ids[mesh.cell_id(cell)]]
    return float(np.mean(x @ grav.vector))
