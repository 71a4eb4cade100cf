"""Energy and momentum monitors, L2 errors and convergence rates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import FluidModel, assemble_lumped_mass, potential_energy_parts
from .grid import Mesh
from .kinematics import StatePair
from .material import MaterialParams


@dataclass
class DiagnosticsRecord:
    """Energies (J) and momentum maps at one sampled time.

    ``j_rot`` is a scalar in 2D and a 3-vector in 3D.  ``e_pen`` holds the
    incompressibility and contact penalty energies together.
    """

    t: float
    e_kin: float
    e_int: float
    e_pot: float
    e_pen: float
    j_rot: np.ndarray
    j_lin: np.ndarray

    @property
    def e_total(self) -> float:
        return self.e_kin + self.e_int + self.e_pot + self.e_pen

    def row(self) -> list[float]:
        return [
            self.t,
            self.e_kin,
            self.e_int,
            self.e_pot,
            self.e_pen,
            self.e_total,
            *np.atleast_1d(self.j_rot),
            *np.atleast_1d(self.j_lin),
        ]


def kinetic_energy(pair: StatePair, mesh: Mesh, mat: MaterialParams) -> float:
    m = assemble_lumped_mass(mesh, mat)
    v = pair.velocity
    return float(0.5 * np.sum(m * np.sum(v * v, axis=1)))


def total_energy(pair: StatePair, model: FluidModel) -> dict:
    """Energy parts for the pair ``(phi^j, phi^{j+1})``.

    Kinetic energy uses ``v^j``; potential terms are taken at ``phi^j``.
    """
    parts = potential_energy_parts(model, pair.prev)
    e_kin = kinetic_energy(pair, model.mesh, model.material)
    out = {
        "e_kin": e_kin,
        "e_int": parts["internal"],
        "e_pot": parts["potential"],
        "e_pen": parts["penalty"] + parts["contact"],
    }
    out["e_total"] = sum(out.values())
    return out


def _cross(x, p):
    if x.shape[-1] == 2:
        return x[..., 0] * p[..., 1] - x[..., 1] * p[..., 0]
    return np.cross(x, p)


def momentum_map(pair: StatePair, mesh: Mesh, mat: MaterialParams):
    """Angular and linear momentum ``(sum phi x m v, sum m v)`` using ``(phi^j, v^j)``."""
    p = assemble_lumped_mass(mesh, mat)[:, None] * pair.velocity
    j_lin = p.sum(axis=0)
    j_rot = _cross(pair.prev, p).sum(axis=0)
    return j_rot, j_lin


def momentum_map_2d(pair, mesh, mat):
    if mesh.dim != 2:
        raise ValueError("momentum_map_2d needs a 2D mesh")
    j_rot, j_lin = momentum_map(pair, mesh, mat)
    return float(j_rot), j_lin


def momentum_map_3d(pair, mesh, mat):
    if mesh.dim != 3:
        raise ValueError("momentum_map_3d needs a 3D mesh")
    return momentum_map(pair, mesh, mat)


def momentum_map_cellwise(pair: StatePair, mesh: Mesh, mat: MaterialParams):
    """Same maps summed cell by cell over corners with weight ``M / 2**d``."""
    w = mat.rho0 * mesh.cell_measure / mesh.n_corners
    ids = mesh.cell_node_ids
    p = w * pair.velocity[ids]
    j_lin = p.sum(axis=(0, 1))
    j_rot = _cross(pair.prev[ids], p).sum(axis=(0, 1))
    return j_rot, j_lin


def diagnostics_record(t: float, pair: StatePair, model: FluidModel) -> DiagnosticsRecord:
    e = total_energy(pair, model)
    j_rot, j_lin = momentum_map(pair, model.mesh, model.material)
    return DiagnosticsRecord(t, e["e_kin"], e["e_int"], e["e_pot"], e["e_pen"], j_rot, j_lin)


def diagnostics_header(dim: int) -> list[str]:
    head = ["t", "e_kin", "e_int", "e_pot", "e_pen", "e_total", "j_rot"]
    if dim == 3:
        head += ["j_rot_y", "j_rot_z"]
    head += ["j_lin_x", "j_lin_y"] + (["j_lin_z"] if dim == 3 else [])
    return head


def write_diagnostics_csv(path, records, dim: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(diagnostics_header(dim))
        for rec in records:
            w.writerow([f"{x:.17g}" for x in rec.row()])


def l2_error(state: np.ndarray, reference: np.ndarray) -> float:
    """``sqrt(sum_n |phi_n - phi_ref_n|**2)`` over matching nodes."""
    state = np.asarray(state, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if state.shape != reference.shape:
        raise ValueError(f"shape mismatch {state.shape} vs {reference.shape}")
    return float(np.sqrt(np.sum((state - reference) ** 2)))


def restrict_to_coarse(fine: np.ndarray, fine_mesh: Mesh, coarse_mesh: Mesh) -> np.ndarray:
    """Values of a fine-mesh field at the lattice points of a nested coarse mesh."""
    ratios = []
    for nf, nc, ef, ec in zip(fine_mesh.cells, coarse_mesh.cells, fine_mesh.extent, coarse_mesh.extent):
        if nf % nc or not math.isclose(ef, ec, rel_tol=1e-9):
            raise ValueError("meshes share no common lattice")
        ratios.append(nf // nc)
    grid = fine.reshape(fine_mesh.node_shape[::-1] + (fine.shape[-1],))
    sl = tuple(slice(None, None, r) for r in ratios[::-1])
    return grid[sl].reshape(-1, fine.shape[-1])


@dataclass
class ConvergenceReport:
    """Rows ``(h, error, rate)``; the first rate is NaN."""

    h: np.ndarray
    errors: np.ndarray
    rates: np.ndarray

    def rows(self):
        return list(zip(self.h.tolist(), self.errors.tolist(), self.rates.tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "error", "rate"])
            for h, e, r in self.rows():
                w.writerow([f"{h:.17g}", f"{e:.17g}", "" if math.isnan(r) else f"{r:.17g}"])

    def table(self) -> str:
        lines = [f"{'h':>12} {'error':>12} {'rate':>7}"]
        for h, e, r in self.rows():
            lines.append(f"{h:12.5g} {e:12.4e} {'' if math.isnan(r) else f'{r:7.3f}':>7}")
        return "\n".join(lines)


def convergence_rates(errors, h=None, rtol: float = 1e-6) -> ConvergenceReport:
    """Rates ``log2(e_{i-1} / e_i)`` between consecutive halvings.

    Parameters
    ----------
    errors : sequence of float, or sequence of ``(h, error)`` pairs
    h : sequence of float, optional
        Resolutions; must halve at every level when given.
    """
    arr = np.asarray(errors, dtype=float)
    if arr.ndim == 2:
        h, arr = arr[:, 0], arr[:, 1]
    if np.any(~(arr > 0)):
        raise ValueError("errors must be positive")
    if h is not None:
        h = np.asarray(h, dtype=float)
        if h.shape != arr.shape:
            raise ValueError("h and errors differ in length")
        if not np.allclose(h[:-1] / h[1:], 2.0, rtol=rtol):
            raise ValueError(f"resolutions must halve at every level, got {h.tolist()}")
    else:
        h = np.full(arr.shape, np.nan)
    rates = np.concatenate([[np.nan], np.log2(arr[:-1] / arr[1:])])
    return ConvergenceReport(h, arr, rates)
