"""Discrete deformation gradients and Jacobians.

A configuration is an ``(n_nodes, dim)`` array of node positions in the
storage order of :class:`~mvfluid.grid.Mesh`.  Every cell carries one
deformation gradient per spatial corner; its columns are the edge vectors
from that corner to the neighbouring corners of the same cell, divided by
the reference spacing along the edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveJacobian
from .grid import Mesh


@dataclass(frozen=True)
class StatePair:
    """Positions at two consecutive time levels ``j`` and ``j + 1``.

    The integrators also carry the discrete velocity ``vel`` so that it is
    not re-derived from the position difference, which would amplify the
    rounding error of the positions by ``1 / dt``.  When ``vel`` is omitted
    it is computed as ``(next - prev) / dt``.
    """

    prev: np.ndarray
    next: np.ndarray
    dt: float
    vel: np.ndarray | None = None

    def __post_init__(self):
        if self.prev.shape != self.next.shape:
            raise ValueError("prev and next configurations differ in shape")
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")

    @property
    def velocity(self) -> np.ndarray:
        """Discrete velocity ``(next - prev) / dt`` per node."""
        if self.vel is not None:
            return self.vel
        return (self.next - self.prev) / self.dt

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.prev + self.next)


# -- vectorised kernels -------------------------------------------------------


def gradient_columns(mesh: Mesh, positions: np.ndarray) -> np.ndarray:
    """Columns of every corner gradient of every cell.

    Returns an array of shape ``(n_cells, n_corners, dim, dim)`` whose entry
    ``[c, l, k, :]`` is column ``k`` of the gradient ``F_l`` of cell ``c``.
    """
    cols, axes = mesh.corner_columns
    corners = positions[mesh.cell_node_ids]
    diff = corners[:, cols, :] - corners[:, :, None, :]
    return diff / np.asarray(mesh.spacing)[axes][None, :, :, None]


def determinant_of_columns(cols: np.ndarray) -> np.ndarray:
    """Determinant of matrices given by their columns along axis ``-2``."""
    if cols.shape[-1] == 2:
        return cols[..., 0, 0] * cols[..., 1, 1] - cols[..., 0, 1] * cols[..., 1, 0]
    return np.einsum(
        "...i,...i->...", np.cross(cols[..., 0, :], cols[..., 1, :]), cols[..., 2, :]
    )


def cofactor_columns(cols: np.ndarray) -> np.ndarray:
    """``d det / d column_k`` for matrices given by their columns.

    Same layout as the input; equals ``det(F) F^{-T}`` read column-wise
    whenever ``F`` is invertible.
    """
    out = np.empty_like(cols)
    if cols.shape[-1] == 2:
        out[..., 0, 0] = cols[..., 1, 1]
        out[..., 0, 1] = -cols[..., 1, 0]
        out[..., 1, 0] = -cols[..., 0, 1]
        out[..., 1, 1] = cols[..., 0, 0]
        return out
    c0, c1, c2 = cols[..., 0, :], cols[..., 1, :], cols[..., 2, :]
    out[..., 0, :] = np.cross(c1, c2)
    out[..., 1, :] = np.cross(c2, c0)
    out[..., 2, :] = np.cross(c0, c1)
    return out


def all_jacobians(mesh: Mesh, positions: np.ndarray, check: bool = True) -> np.ndarray:
    """Discrete Jacobians of every cell, shape ``(n_cells, n_corners)``."""
    jac = determinant_of_columns(gradient_columns(mesh, positions))
    if check:
        check_positive(mesh, jac)
    return jac


def check_positive(mesh: Mesh, jac: np.ndarray) -> None:
    bad = ~(jac > 0)
    if bad.any():
        c, ell = np.argwhere(bad)[0]
        cell = tuple(int(i) for i in mesh.cell_indices[c])
        raise NonPositiveJacobian(
            f"non-positive Jacobian {jac[c, ell]:.6g} in cell {cell}, corner {ell + 1}",
            cell=cell,
            corner=int(ell),
            value=float(jac[c, ell]),
        )


# -- per-cell operations ---------------------------------------------------------


def _cell_columns(mesh: Mesh, positions: np.ndarray, cell) -> np.ndarray:
    cid = mesh.cell_id(cell)
    cols, axes = mesh.corner_columns
    corners = positions[mesh.cell_node_ids[cid]]
    diff = corners[cols, :] - corners[:, None, :]
    return diff / np.asarray(mesh.spacing)[axes][:, :, None]


def edge_vectors_2d(positions: np.ndarray, mesh: Mesh, cell) -> np.ndarray:
    """Edge-vector pairs of the four corners of a 2D cell.

    Returns shape ``(4, 2, 2)``: ``[corner, column, component]``.
    """
    if mesh.dim != 2:
        raise ValueError("edge_vectors_2d needs a 2D mesh")
    return _cell_columns(mesh, positions, cell)


def midpoint_edge_vectors_2d(pair: StatePair, mesh: Mesh, cell) -> np.ndarray:
    """Edge vectors built from the time-averaged positions."""
    return edge_vectors_2d(pair.midpoint, mesh, cell)


def deformation_gradients(positions: np.ndarray, mesh: Mesh, cell) -> np.ndarray:
    """Corner deformation gradients ``F_l`` of one cell, ``(n_corners, d, d)``."""
    return np.swapaxes(_cell_columns(mesh, positions, cell), -1, -2)


def deformation_gradients_2d(positions, mesh, cell):
    if mesh.dim != 2:
        raise ValueError("deformation_gradients_2d needs a 2D mesh")
    return deformation_gradients(positions, mesh, cell)


def deformation_gradients_3d(positions, mesh, cell):
    if mesh.dim != 3:
        raise ValueError("deformation_gradients_3d needs a 3D mesh")
    return deformation_gradients(positions, mesh, cell)


def jacobians(positions: np.ndarray, mesh: Mesh, cell) -> np.ndarray:
    """Discrete Jacobians of one cell via cross/triple products.

    Raises
    ------
    NonPositiveJacobian
        If any corner Jacobian is ``<= 0``.
    """
    jac = determinant_of_columns(_cell_columns(mesh, positions, cell))
    bad = np.flatnonzero(~(jac > 0))
    if bad.size:
        ell = int(bad[0])
        raise NonPositiveJacobian(
            f"non-positive Jacobian {jac[ell]:.6g} in cell {tuple(cell)}, corner {ell + 1}",
            cell=tuple(int(i) for i in cell),
            corner=ell,
            value=float(jac[ell]),
        )
    return jac


def jacobians_2d(positions, mesh, cell):
    if mesh.dim != 2:
        raise ValueError("jacobians_2d needs a 2D mesh")
    return jacobians(positions, mesh, cell)


def jacobians_3d(positions, mesh, cell):
    if mesh.dim != 3:
        raise ValueError("jacobians_3d needs a 3D mesh")
    return jacobians(positions, mesh, cell)


def jacobian_derivative(F: np.ndarray) -> np.ndarray:
    """``d det(F) / dF = det(F) F^{-T}`` for a matrix with positive determinant."""
    F = np.asarray(F, dtype=float)
    cof = cofactor_columns(np.swapaxes(F, -1, -2))
    det = determinant_of_columns(np.swapaxes(F, -1, -2))
    if not det > 0:
        raise NonPositiveJacobian(f"deformation gradient has determinant {det:.6g}", value=float(det))
    return np.swapaxes(cof, -1, -2)


def node_edge_vectors_2d(positions: np.ndarray, mesh: Mesh) -> np.ndarray:
    """The four edge vectors ``F_1..F_4`` attached to every node of a 2D mesh.

    ``F_1`` and ``F_2`` point to the ``+a`` and ``+b`` neighbours, ``F_3`` and
    ``F_4`` to the ``-a`` and ``-b`` neighbours.  Missing neighbours give NaN.
    Shape ``(A + 1, B + 1, 4, 2)``.
    """
    ds1, ds2 = mesh.spacing
    grid = positions.reshape(mesh.node_shape[::-1] + (2,)).transpose(1, 0, 2)
    out = np.full(grid.shape[:2] + (4, 2), np.nan)
    out[:-1, :, 0] = (grid[1:] - grid[:-1]) / ds1
    out[:, :-1, 1] = (grid[:, 1:] - grid[:, :-1]) / ds2
    out[1:, :, 2] = (grid[:-1] - grid[1:]) / ds1
    out[:, 1:, 3] = (grid[:, :-1] - grid[:, 1:]) / ds2
    return out
