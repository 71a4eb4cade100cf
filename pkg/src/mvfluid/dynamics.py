"""Nodal forces, lumped masses and the two time integrators.

All forces are minus the gradient of the discrete potential energy

    U(phi) = sum_cells V [rho0 W_d + rho0 Pi_d + Phi_d0] + sum_nodes V K Psi_+**2 / 2

with ``V`` the reference cell measure and ``W_d``, ``Pi_d``, ``Phi_d0`` the
corner averages of internal energy, gravitational potential and the
incompressibility penalty.  Differentiating a corner Jacobian with respect
to a column of its gradient gives the matching cofactor column, so the
pressure contribution of corner ``l`` to the node at the end of column
``k`` is ``V / 2**d * P_l * cof_k / ds_k``; the corner node itself receives
the negated sum.

The explicit scheme reads

    m (v^j - v^{j-1}) = dt f(phi^j),      phi^{j+1} = phi^j + dt v^j,

and the implicit midpoint scheme replaces ``f(phi^j)`` by the average of
``f`` at the two neighbouring time midpoints.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, splu

from .constraints import ConstraintSet, contact_forces
from .errors import NoConvergence, NonFiniteState, NonPositiveJacobian
from .grid import Mesh
from .kinematics import (
    StatePair,
    check_positive,
    cofactor_columns,
    determinant_of_columns,
    gradient_columns,
)
from .material import GravitySpec, MaterialParams, internal_energy, pressure

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FluidModel:
    """Everything needed to evaluate energies and forces on a mesh."""

    mesh: Mesh
    material: MaterialParams
    gravity: GravitySpec = None
    constraints: ConstraintSet = field(default_factory=ConstraintSet)

    def __post_init__(self):
        if self.gravity is None:
            object.__setattr__(self, "gravity", GravitySpec.none(self.mesh.dim))
        if len(self.gravity.g) != self.mesh.dim:
            raise ValueError("gravity vector dimension does not match the mesh")

    @property
    def cell_mass(self) -> float:
        return self.material.rho0 * self.mesh.cell_measure

    @property
    def corner_weight(self) -> float:
        return self.mesh.cell_measure / self.mesh.n_corners


@dataclass
class CellForces:
    """Force contributions of one cell to its corner nodes, ``(n_corners, dim)``."""

    pressure: np.ndarray
    penalty: np.ndarray
    gravity: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.pressure + self.penalty + self.gravity


# -- kernels ---------------------------------------------------------------------


def _corner_forces(mesh: Mesh, cols: np.ndarray, P: np.ndarray, weight: float) -> np.ndarray:
    """Per-cell corner forces from corner pressures ``P`` (n_cells, n_corners)."""
    col_ids, axes = mesh.corner_columns
    cof = cofactor_columns(cols)
    ds = np.asarray(mesh.spacing)[axes]
    contrib = (weight * P)[:, :, None, None] * cof / ds[None, :, :, None]
    out = np.zeros(cols.shape[:2] + (mesh.dim,))
    n_corners = mesh.n_corners
    for ell in range(n_corners):
        for k in range(mesh.dim):
            out[:, col_ids[ell, k]] += contrib[:, ell, k]
            out[:, ell] -= contrib[:, ell, k]
    return out


def _scatter(mesh: Mesh, per_corner: np.ndarray) -> np.ndarray:
    ids = mesh.cell_node_ids.ravel()
    flat = per_corner.reshape(-1, mesh.dim)
    return np.stack(
        [np.bincount(ids, weights=flat[:, i], minlength=mesh.n_nodes) for i in range(mesh.dim)],
        axis=1,
    )


def _pressures(model: FluidModel, J: np.ndarray):
    p_mat = pressure(model.material, J)
    p_pen = -model.constraints.incompressibility.r * (J - 1.0)
    return p_mat, p_pen


def nodal_forces(model: FluidModel, positions: np.ndarray, check: bool = True) -> np.ndarray:
    """Total force ``-dU/dphi`` on every node, shape ``(n_nodes, dim)``.

    Raises
    ------
    NonPositiveJacobian
        If any corner Jacobian is not positive.
    """
    mesh = model.mesh
    cols = gradient_columns(mesh, positions)
    J = determinant_of_columns(cols)
    if check:
        check_positive(mesh, J)
    p_mat, p_pen = _pressures(model, J)
    f = _scatter(mesh, _corner_forces(mesh, cols, p_mat + p_pen, model.corner_weight))
    if not model.gravity.is_zero:
        f -= (model.material.rho0 * model.corner_weight * mesh.incidence_counts)[:, None] * (
            model.gravity.vector[None, :]
        )
    if model.constraints.contacts:
        f += contact_forces(model.constraints.contacts, positions, mesh.cell_measure)[1]
    return f


def _single_cell(model: FluidModel, positions: np.ndarray, cell) -> CellForces:
    mesh = model.mesh
    cid = mesh.cell_id(cell)
    ids = mesh.cell_node_ids[cid]
    # Evaluate on a one-cell mesh holding only this cell's corners.
    local = Mesh((1,) * mesh.dim, mesh.spacing)
    corners = np.empty((mesh.n_corners, mesh.dim))
    corners[local.cell_node_ids[0]] = positions[ids]
    cols = gradient_columns(local, corners)
    J = determinant_of_columns(cols)
    bad = np.flatnonzero(~(J[0] > 0))
    if bad.size:
        ell = int(bad[0])
        raise NonPositiveJacobian(
            f"non-positive Jacobian {J[0, ell]:.6g} in cell {tuple(cell)}, corner {ell + 1}",
            cell=tuple(int(i) for i in cell),
            corner=ell,
            value=float(J[0, ell]),
        )
    p_mat, p_pen = _pressures(model, J)
    w = model.corner_weight
    grav = np.broadcast_to(
        -model.material.rho0 * w * model.gravity.vector, (mesh.n_corners, mesh.dim)
    ).copy()
    return CellForces(
        pressure=_corner_forces(local, cols, p_mat, w)[0],
        penalty=_corner_forces(local, cols, p_pen, w)[0],
        gravity=grav,
    )


def cell_forces_explicit_2d(positions, model: FluidModel, cell) -> CellForces:
    """Forces of one 2D cell on its four corners at configuration ``positions``."""
    if model.mesh.dim != 2:
        raise ValueError("cell_forces_explicit_2d needs a 2D mesh")
    return _single_cell(model, positions, cell)


def cell_forces_explicit_3d(positions, model: FluidModel, cell) -> CellForces:
    """Forces of one 3D cell on its eight corners at configuration ``positions``."""
    if model.mesh.dim != 3:
        raise ValueError("cell_forces_explicit_3d needs a 3D mesh")
    return _single_cell(model, positions, cell)


def cell_forces_midpoint(pair: StatePair, model: FluidModel, cell) -> CellForces:
    """``-d/dphi^{j+1}`` of the cell energy evaluated at the time midpoint.

    This is half the configuration force at ``(phi^j + phi^{j+1}) / 2``.
    """
    f = _single_cell(model, pair.midpoint, cell)
    return CellForces(0.5 * f.pressure, 0.5 * f.penalty, 0.5 * f.gravity)


cell_forces_midpoint_2d = cell_forces_midpoint
cell_forces_midpoint_3d = cell_forces_midpoint


def potential_energy_parts(model: FluidModel, positions: np.ndarray) -> dict:
    """Internal, gravitational, incompressibility-penalty and contact energies."""
    mesh = model.mesh
    J = determinant_of_columns(gradient_columns(mesh, positions))
    check_positive(mesh, J)
    w = model.corner_weight
    rho0 = model.material.rho0
    e_int = rho0 * w * float(np.sum(internal_energy(model.material, J)))
    e_pen = w * float(np.sum(0.5 * model.constraints.incompressibility.r * (J - 1.0) ** 2))
    e_pot = rho0 * w * float(np.sum(mesh.incidence_counts * (positions @ model.gravity.vector)))
    e_con = 0.0
    if model.constraints.contacts:
        e_con = contact_forces(model.constraints.contacts, positions, mesh.cell_measure)[0]
    return {"internal": e_int, "potential": e_pot, "penalty": e_pen, "contact": e_con}


def potential_energy(model: FluidModel, positions: np.ndarray) -> float:
    """The total discrete potential ``U(phi)`` whose gradient is ``-nodal_forces``."""
    return float(sum(potential_energy_parts(model, positions).values()))


def assemble_lumped_mass(mesh: Mesh, mat: MaterialParams) -> np.ndarray:
    """Nodal masses ``M k_n / 2**d`` with ``k_n`` the incident cell count."""
    return mat.rho0 * mesh.cell_measure * mesh.incidence_counts / mesh.n_corners


# -- integrators -------------------------------------------------------------------


def bootstrap_pair(positions: np.ndarray, velocity: np.ndarray, dt: float) -> StatePair:
    """Pair ``(phi^0 - dt v^0, phi^0)`` realising an initial velocity."""
    velocity = np.array(velocity, dtype=float)
    return StatePair(positions - dt * velocity, positions.copy(), dt, velocity)


def _check_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(f"non-finite {what}")


def step_explicit(pair: StatePair, model: FluidModel, mass: np.ndarray | None = None) -> StatePair:
    """Advance ``(phi^{j-1}, phi^j)`` to ``(phi^j, phi^{j+1})`` explicitly."""
    if mass is None:
        mass = assemble_lumped_mass(model.mesh, model.material)
    f = nodal_forces(model, pair.next)
    v = pair.velocity + pair.dt * f / mass[:, None]
    nxt = pair.next + pair.dt * v
    _check_finite(nxt, "positions")
    return StatePair(pair.next, nxt, pair.dt, v)


@dataclass(frozen=True)
class SolverSettings:
    """Newton solver controls for the implicit midpoint scheme.

    Parameters
    ----------
    tolerance : float
        Relative residual bound; the solver stops when
        ``max|R| < tolerance * M * max(1, typical speed)``.
    max_iterations : int
        Newton iteration cap.
    jacobian_mode : {"auto", "finite-difference", "matrix-free"}
        ``"finite-difference"`` assembles the sparse Jacobian by coloured
        finite differences; ``"matrix-free"`` uses GMRES with directional
        derivatives; ``"auto"`` picks the former up to
        ``dense_limit`` unknowns.
    """

    tolerance: float = 1e-10
    max_iterations: int = 50
    jacobian_mode: str = "auto"
    dense_limit: int = 2000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.jacobian_mode not in ("auto", "finite-difference", "matrix-free"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


def _colors(mesh: Mesh) -> np.ndarray:
    idx = mesh.node_indices % 3
    return idx @ (3 ** np.arange(mesh.dim))


def _sparsity(mesh: Mesh):
    """Node pairs sharing a cell (``|i - j|_inf <= 1``)."""
    rows, cols = [], []
    ids = mesh.cell_node_ids
    for a in range(ids.shape[1]):
        for b in range(ids.shape[1]):
            rows.append(ids[:, a])
            cols.append(ids[:, b])
    pairs = np.unique(np.stack([np.concatenate(rows), np.concatenate(cols)], axis=1), axis=0)
    return pairs[:, 0], pairs[:, 1]


def force_jacobian_fd(model: FluidModel, x: np.ndarray, h: float | None = None) -> sp.csc_matrix:
    """Sparse ``df/dx`` by central differences with lattice colouring.

    Nodes whose lattice indices agree modulo 3 never share a cell, so all of
    them can be perturbed at once; each column is recovered from the force
    change at the nodes adjacent to the perturbed one.
    """
    mesh = model.mesh
    d = mesh.dim
    n = mesh.n_nodes
    if h is None:
        h = 1e-7 * min(mesh.spacing)
    colors = _colors(mesh)
    ri, ci = _sparsity(mesh)
    vals = np.zeros((len(ri), d, d))
    for color in np.unique(colors):
        sel = colors == color
        # map each node to the perturbed node of this colour in its neighbourhood
        owner = np.full(n, -1)
        mask = sel[ci]
        owner_rows, owner_cols = ri[mask], ci[mask]
        owner[owner_rows] = owner_cols
        for comp in range(d):
            xp = x.copy()
            xm = x.copy()
            xp[sel, comp] += h
            xm[sel, comp] -= h
            df = (nodal_forces(model, xp) - nodal_forces(model, xm)) / (2 * h)
            entry = mask & (owner[ri] == ci)
            vals[entry, :, comp] = df[ri[entry]]
    rows = (ri[:, None, None] * d + np.arange(d)[None, :, None]) + 0 * np.arange(d)[None, None, :]
    cols = (ci[:, None, None] * d + np.arange(d)[None, None, :]) + 0 * np.arange(d)[None, :, None]
    return sp.csc_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(n * d, n * d))


class MidpointSolver:
    """Newton solver for one implicit midpoint step.

    Parameters
    ----------
    model : FluidModel
    settings : SolverSettings
    """

    def __init__(self, model: FluidModel, settings: SolverSettings | None = None):
        self.model = model
        self.settings = settings or SolverSettings()
        self.mass = assemble_lumped_mass(model.mesh, model.material)
        self.iterations = []

    def _use_fd(self) -> bool:
        mode = self.settings.jacobian_mode
        if mode == "auto":
            return self.model.mesh.n_nodes * self.model.mesh.dim <= self.settings.dense_limit
        return mode == "finite-difference"

    def step(self, pair: StatePair, f_prev: np.ndarray | None = None):
        """Return ``(new_pair, f_mid)`` where ``f_mid`` is the force at the new midpoint.

        ``f_prev`` is the force at ``(phi^{j-1} + phi^j) / 2``; it is
        recomputed when not supplied.  The Newton unknown is the velocity
        ``v^j``, with ``phi^{j+1} = phi^j + dt v^j`` and residual

            R(v) = m (v^{j-1} - v) + dt / 2 [f_prev + f(phi^j + dt v / 2)].
        """
        model, dt, m = self.model, pair.dt, self.mass[:, None]
        x_cur = pair.next
        if f_prev is None:
            f_prev = nodal_forces(model, pair.midpoint)
        v_prev = pair.velocity
        d = model.mesh.dim
        n = x_cur.size
        base = m * v_prev + 0.5 * dt * f_prev

        def residual(v):
            f_mid = nodal_forces(model, x_cur + 0.5 * dt * v)
            return base - m * v + 0.5 * dt * f_mid, f_mid

        v = v_prev + dt * f_prev / m
        r, f_mid = residual(v)
        v_typ = max(1.0, float(np.max(np.abs(v_prev))))
        tol = self.settings.tolerance * model.cell_mass * v_typ
        use_fd = self._use_fd()
        lu = None
        rnorm = np.inf
        for it in range(self.settings.max_iterations + 1):
            rnorm = float(np.max(np.abs(r)))
            if not np.isfinite(rnorm):
                raise NonFiniteState("non-finite residual in implicit solve")
            if rnorm < tol:
                self.iterations.append(it)
                nxt = x_cur + dt * v
                _check_finite(nxt, "positions")
                return StatePair(x_cur, nxt, dt, v), f_mid
            if it == self.settings.max_iterations:
                break
            mid = x_cur + 0.5 * dt * v
            if use_fd:
                if lu is None or it % 5 == 0:
                    K = force_jacobian_fd(model, mid)
                    A = (-sp.diags(np.repeat(self.mass, d)) + 0.25 * dt * dt * K).tocsc()
                    lu = splu(A)
                delta = -lu.solve(r.ravel())
            else:
                eps = 1e-7 * min(model.mesh.spacing)

                def matvec(u, mid=mid, f0=f_mid):
                    u = u.reshape(x_cur.shape)
                    scale = eps / max(np.max(np.abs(u)), 1e-300)
                    df = (nodal_forces(model, mid + scale * u) - f0) / scale
                    return (-m * u + 0.25 * dt * dt * df).ravel()

                op = LinearOperator((n, n), matvec=matvec)
                delta, _ = gmres(op, -r.ravel(), rtol=1e-12, atol=0.0, restart=60, maxiter=20)
            delta = delta.reshape(x_cur.shape)
            alpha = 1.0
            while True:
                try:
                    r_new, f_new = residual(v + alpha * delta)
                    break
                except NonPositiveJacobian:
                    alpha *= 0.5
                    if alpha < 1e-6:
                        raise
            v = v + alpha * delta
            r, f_mid = r_new, f_new
        raise NoConvergence(
            f"implicit solve did not converge in {self.settings.max_iterations} iterations "
            f"(residual {rnorm:.3e}, tolerance {tol:.3e})",
            residual=rnorm,
            iterations=self.settings.max_iterations,
        )


def step_implicit_midpoint(
    pair: StatePair, model: FluidModel, settings: SolverSettings | None = None
) -> StatePair:
    """Advance one implicit midpoint step from ``(phi^{j-1}, phi^j)``."""
    return MidpointSolver(model, settings).step(pair)[0]
