"""Structured meshes of the reference configuration.

Nodes are stored row-major over the lattice indices with ``a`` varying
fastest, i.e. node ``(a, b)`` has flat index ``a + (A + 1) * b`` and node
``(a, b, c)`` has flat index ``a + (A + 1) * (b + (B + 1) * c)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Spatial corners of a cell, as lattice offsets from its lowest node.
CORNER_OFFSETS_2D = ((0, 0), (1, 0), (0, 1), (1, 1))
CORNER_OFFSETS_3D = (
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (0, 1, 1),
    (1, 0, 1),
    (1, 1, 1),
)

# For every corner l, the corners reached by the columns of the discrete
# deformation gradient F_l, in column order.  2D: F_1 = [F1 F2] at (a,b),
# F_2 = [F2 F3] at (a+1,b), F_3 = [F4 F1] at (a,b+1), F_4 = [F3 F4] at
# (a+1,b+1).  3D follows the same construction with six edge vectors.
_COLUMN_TARGETS_2D = (
    ((1, 0), (0, 1)),
    ((1, 1), (0, 0)),
    ((0, 0), (1, 1)),
    ((0, 1), (1, 0)),
)
_COLUMN_TARGETS_3D = (
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((1, 1, 0), (0, 0, 0), (1, 0, 1)),
    ((0, 0, 0), (1, 1, 0), (0, 1, 1)),
    ((0, 1, 1), (1, 0, 1), (0, 0, 0)),
    ((0, 1, 0), (1, 0, 0), (1, 1, 1)),
    ((1, 1, 1), (0, 0, 1), (0, 1, 0)),
    ((0, 0, 1), (1, 1, 1), (1, 0, 0)),
    ((1, 0, 1), (0, 1, 1), (1, 1, 0)),
)


def _corner_tables(offsets, targets):
    """Local column indices and axes of each corner's gradient columns."""
    local = {off: i for i, off in enumerate(offsets)}
    columns = np.empty((len(offsets), len(offsets[0])), dtype=np.intp)
    axes = np.empty_like(columns)
    for ell, (corner, cols) in enumerate(zip(offsets, targets)):
        for k, tgt in enumerate(cols):
            diff = [t - c for t, c in zip(tgt, corner)]
            (axis,) = [i for i, d in enumerate(diff) if d != 0]
            columns[ell, k] = local[tgt]
            axes[ell, k] = axis
    return columns, axes


@dataclass(frozen=True)
class Mesh:
    """Uniform structured mesh of a rectangle (2D) or box (3D).

    Parameters
    ----------
    cells : tuple of int
        Number of cells along each axis, ``(A, B)`` or ``(A, B, C)``.
    spacing : tuple of float
        Reference spacings ``(ds1, ds2[, ds3])`` in metres.
    """

    cells: tuple[int, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        spacing = tuple(float(s) for s in self.spacing)
        if len(cells) not in (2, 3) or len(spacing) != len(cells):
            raise ValueError("mesh must be 2D or 3D with one spacing per axis")
        if any(c < 1 for c in cells):
            raise ValueError(f"cell counts must be >= 1, got {cells}")
        if any(not np.isfinite(s) or s <= 0 for s in spacing):
            raise ValueError(f"spacings must be positive, got {spacing}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "spacing", spacing)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def node_shape(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cells)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.node_shape))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_measure(self) -> float:
        """Reference area (2D) or volume (3D) of one cell."""
        return float(np.prod(self.spacing))

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(c * s for c, s in zip(self.cells, self.spacing))

    @property
    def corner_offsets(self):
        return CORNER_OFFSETS_2D if self.dim == 2 else CORNER_OFFSETS_3D

    @property
    def n_corners(self) -> int:
        return 2**self.dim

    # -- index arithmetic -------------------------------------------------

    def node_id(self, node) -> int:
        node = tuple(int(i) for i in node)
        self._check_node(node)
        return int(np.ravel_multi_index(node, self.node_shape, order="F"))

    def node_index(self, node_id: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(node_id, self.node_shape, order="F"))

    def _check_node(self, node):
        if len(node) != self.dim or any(
            i < 0 or i > c for i, c in zip(node, self.cells)
        ):
            raise IndexError(f"node {node} outside mesh with cells {self.cells}")

    def _check_cell(self, cell):
        if len(cell) != self.dim or any(
            i < 0 or i >= c for i, c in zip(cell, self.cells)
        ):
            raise IndexError(f"cell {cell} outside mesh with cells {self.cells}")

    def cell_nodes(self, cell) -> list[tuple[int, ...]]:
        """Spatial corner nodes of ``cell`` in corner order."""
        cell = tuple(int(i) for i in cell)
        self._check_cell(cell)
        return [tuple(c + o for c, o in zip(cell, off)) for off in self.corner_offsets]

    def incident_cells(self, node) -> list[tuple[int, ...]]:
        """All cells having ``node`` as one of their corners."""
        node = tuple(int(i) for i in node)
        self._check_node(node)
        ranges = [
            [i - 1 for i in (n, n + 1) if 0 <= i - 1 < c]
            for n, c in zip(node, self.cells)
        ]
        return [tuple(cell) for cell in itertools.product(*ranges)]

    def reference_position(self, node) -> np.ndarray:
        node = tuple(int(i) for i in node)
        self._check_node(node)
        return np.array([i * s for i, s in zip(node, self.spacing)])

    # -- vectorised tables --------------------------------------------------

    @cached_property
    def node_indices(self) -> np.ndarray:
        """``(n_nodes, dim)`` lattice indices in storage order."""
        grids = np.meshgrid(*[np.arange(n) for n in self.node_shape], indexing="ij")
        return np.stack([g.ravel(order="F") for g in grids], axis=1)

    @cached_property
    def reference_positions(self) -> np.ndarray:
        return self.node_indices * np.asarray(self.spacing)

    @cached_property
    def cell_indices(self) -> np.ndarray:
        """``(n_cells, dim)`` lowest-corner lattice indices, row-major."""
        grids = np.meshgrid(*[np.arange(n) for n in self.cells], indexing="ij")
        return np.stack([g.ravel(order="F") for g in grids], axis=1)

    @cached_property
    def cell_node_ids(self) -> np.ndarray:
        """``(n_cells, 2**dim)`` flat node ids of every cell's corners."""
        idx = self.cell_indices[:, None, :] + np.asarray(self.corner_offsets)[None]
        return np.ravel_multi_index(
            tuple(np.moveaxis(idx, -1, 0)), self.node_shape, order="F"
        )

    @cached_property
    def corner_columns(self) -> tuple[np.ndarray, np.ndarray]:
        """Local target corner and axis for every gradient column of every corner."""
        if self.dim == 2:
            return _corner_tables(CORNER_OFFSETS_2D, _COLUMN_TARGETS_2D)
        return _corner_tables(CORNER_OFFSETS_3D, _COLUMN_TARGETS_3D)

    @cached_property
    def incidence_counts(self) -> np.ndarray:
        """Number of cells incident to each node."""
        return np.bincount(self.cell_node_ids.ravel(), minlength=self.n_nodes)

    def cell_id(self, cell) -> int:
        cell = tuple(int(i) for i in cell)
        self._check_cell(cell)
        return int(np.ravel_multi_index(cell, self.cells, order="F"))


def Mesh2D(cells_a: int, cells_b: int, ds1: float, ds2: float) -> Mesh:
    return Mesh((cells_a, cells_b), (ds1, ds2))


def Mesh3D(cells_a: int, cells_b: int, cells_c: int, ds1: float, ds2: float, ds3: float) -> Mesh:
    return Mesh((cells_a, cells_b, cells_c), (ds1, ds2, ds3))


def mesh_from_extent(extent, spacing, rtol: float = 1e-9) -> Mesh:
    """Build a mesh whose extent is an exact multiple of ``spacing``."""
    cells = []
    for length, ds in zip(extent, spacing):
        n = round(length / ds)
        if n < 1 or abs(n * ds - length) > rtol * max(length, ds):
            raise ValueError(
                f"extent {length} is not an integer multiple of spacing {ds}"
            )
        cells.append(int(n))
    return Mesh(tuple(cells), tuple(spacing))
