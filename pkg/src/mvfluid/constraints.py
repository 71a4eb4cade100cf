"""Penalty terms: incompressibility and rigid contact.

Contact constraints are written ``Psi(phi) <= 0``; while a node violates one
(``Psi >= 0``) it feels the penalty energy ``K Psi**2 / 2`` per unit cell
measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class IncompressibilityPenalty:
    """Quadratic penalty ``r/2 (J - 1)**2`` per corner; ``r = 0`` disables it."""

    r: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"penalty parameter must be non-negative, got {self.r}")


def incompressibility_energy(pen: IncompressibilityPenalty, jacobians) -> float:
    """Corner average of ``r/2 (J - 1)**2`` for one cell."""
    J = np.asarray(jacobians, dtype=float)
    return float(np.mean(0.5 * pen.r * (J - 1.0) ** 2))


def incompressibility_pressure(pen: IncompressibilityPenalty, J):
    """Effective pressure ``-r (J - 1)`` added to the material pressure."""
    return -pen.r * (np.asarray(J, dtype=float) - 1.0)


@dataclass(frozen=True)
class HalfSpaceContact:
    """Rigid half-space ``n . phi >= offset`` with ``n`` pointing into the fluid.

    ``Psi(phi) = offset - n . phi``.  A floor at height ``y0`` in 2D is
    ``HalfSpaceContact((0, 1), y0, K)``.
    """

    normal: tuple[float, ...]
    offset: float
    stiffness: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.ndim != 1 or n.size not in (2, 3) or not np.all(np.isfinite(n)):
            raise ValueError(f"invalid normal {self.normal}")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("half-space normal must be a unit vector")
        if not (np.isfinite(self.stiffness) and self.stiffness >= 0):
            raise ValueError(f"stiffness must be non-negative, got {self.stiffness}")
        object.__setattr__(self, "normal", tuple(float(x) for x in n))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def floor(cls, dim: int, height: float, stiffness: float) -> HalfSpaceContact:
        n = [0.0] * dim
        n[-1] = 1.0
        return cls(tuple(n), height, stiffness)

    def evaluate_many(self, points: np.ndarray):
        n = np.asarray(self.normal)
        psi = self.offset - points @ n
        grad = np.broadcast_to(-n, points.shape).copy()
        return psi, grad


@dataclass(frozen=True)
class BoxContact:
    """Axis-aligned rigid box the fluid must stay out of.

    Inside the box ``Psi`` is the distance to the nearest face and its
    gradient is the unit vector pointing into the box, perpendicular to that
    face (so ``-K Psi grad Psi`` expels the node through the nearest face).
    Outside, ``Psi`` is the negated distance to the box and the gradient is
    reported as zero since the constraint is inactive.  Ties between faces go
    to the lower axis, lower face first.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    stiffness: float

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.size not in (2, 3) or np.any(~(hi > lo)):
            raise ValueError(f"invalid box bounds {self.lower}, {self.upper}")
        if not (np.isfinite(self.stiffness) and self.stiffness >= 0):
            raise ValueError(f"stiffness must be non-negative, got {self.stiffness}")
        object.__setattr__(self, "lower", tuple(float(x) for x in lo))
        object.__setattr__(self, "upper", tuple(float(x) for x in hi))

    def evaluate_many(self, points: np.ndarray):
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        d = lo.size
        # inward distances to faces ordered (axis0 lower, axis0 upper, axis1 lower, ...)
        dist = np.empty(points.shape[:-1] + (2 * d,))
        dist[..., 0::2] = points - lo
        dist[..., 1::2] = hi - points
        k = np.argmin(dist, axis=-1)
        depth = np.take_along_axis(dist, k[..., None], axis=-1)[..., 0]
        inside = depth > 0
        outside_gap = np.maximum(np.maximum(lo - points, points - hi), 0.0)
        outside_dist = np.linalg.norm(outside_gap, axis=-1)
        psi = np.where(inside, depth, -outside_dist)
        grad = np.zeros_like(points, dtype=float)
        axis = k // 2
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        idx = np.nonzero(inside)
        grad[idx + (axis[idx],)] = sign[idx]
        return psi, grad


ContactConstraint = HalfSpaceContact | BoxContact


@dataclass(frozen=True)
class ConstraintSet:
    """Incompressibility penalty plus any number of contact constraints."""

    incompressibility: IncompressibilityPenalty = field(default_factory=IncompressibilityPenalty)
    contacts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "contacts", tuple(self.contacts))


def contact_evaluate(c, phi):
    """``(Psi, grad Psi)`` of a contact constraint at one point."""
    p = np.asarray(phi, dtype=float)
    psi, grad = c.evaluate_many(p[None, :])
    return float(psi[0]), grad[0]


def contact_energy_and_force(c, phi, cell_measure: float, dt: float | None = None):
    """Penalty energy ``K Psi**2 / 2`` and nodal force ``-measure K Psi grad Psi``.

    Both vanish while ``Psi < 0``.  ``dt`` is accepted for symmetry with the
    discrete action weight but does not enter the force.
    """
    psi, grad = contact_evaluate(c, phi)
    if psi < 0:
        return 0.0, np.zeros_like(grad)
    return 0.5 * c.stiffness * psi**2, -cell_measure * c.stiffness * psi * grad


def contact_forces(contacts, positions: np.ndarray, cell_measure: float):
    """Total contact energy and ``(n_nodes, dim)`` nodal forces for all contacts."""
    force = np.zeros_like(positions)
    energy = 0.0
    for c in contacts:
        psi, grad = c.evaluate_many(positions)
        active = np.maximum(psi, 0.0)
        energy += float(np.sum(0.5 * c.stiffness * active**2)) * cell_measure
        force -= (cell_measure * c.stiffness * active)[:, None] * grad
    return energy, force


def max_penetration(contacts, positions: np.ndarray) -> float:
    """Largest ``Psi`` over nodes and contacts (negative if none is active)."""
    worst = -np.inf
    for c in contacts:
        psi, _ = c.evaluate_many(positions)
        worst = max(worst, float(np.max(psi)))
    return worst
