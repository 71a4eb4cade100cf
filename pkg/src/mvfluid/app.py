"""Running scenarios and convergence studies, and writing their output."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import BoundaryVelocityProfile, ScenarioConfig
from .constraints import max_penetration
from .diagnostics import (
    ConvergenceReport,
    DiagnosticsRecord,
    convergence_rates,
    diagnostics_record,
    l2_error,
    restrict_to_coarse,
    write_diagnostics_csv,
)
from .dynamics import MidpointSolver, assemble_lumped_mass, step_explicit
from .errors import SimulationError
from .grid import Mesh
from .kinematics import StatePair, all_jacobians

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Outcome of :func:`run_scenario`.

    ``pair`` holds ``(phi^N, phi^{N+1})`` at the end of the run, so
    ``pair.prev`` is the configuration at ``t = N dt`` with ``N =
    config.steps``.  ``steps_completed`` counts time levels reached.  On
    failure ``status`` is ``"failed"``, ``failed_step`` the time level that
    could not be computed and ``pair`` the last good state.
    """

    config: ScenarioConfig
    pair: StatePair
    diagnostics: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    status: str = "ok"
    steps_completed: int = 0
    failed_step: int | None = None
    error: Exception | None = None
    #: ``max |J - 1|`` over the tracked window (see ``track_jacobians_until``)
    max_jacobian_deviation: float = 0.0
    max_penetration: np.ndarray = None

    def __post_init__(self):
        if self.max_penetration is None:
            self.max_penetration = np.full(len(self.config.constraints.contacts), -np.inf)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def positions(self) -> np.ndarray:
        """Configuration at the final completed time level."""
        return self.pair.prev

    @property
    def time(self) -> float:
        return self.steps_completed * self.config.dt


def write_snapshot(path, mesh: Mesh, positions: np.ndarray) -> None:
    """CSV with one row per node in lexicographic lattice order."""
    idx = mesh.node_indices
    order = np.lexsort(idx.T[::-1])
    coords = "xyz"[: mesh.dim]
    header = ",".join([*"abc"[: mesh.dim], *coords])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for n in order:
            ints = ",".join(str(int(i)) for i in idx[n])
            vals = ",".join(f"{x:.6g}" for x in positions[n])
            fh.write(f"{ints},{vals}\n")


def run_scenario(
    config: ScenarioConfig,
    out_dir=None,
    keep_snapshots: bool = True,
    track_jacobians_until: float | None = None,
    callback=None,
) -> RunResult:
    """Advance ``config.steps`` steps, recording diagnostics and snapshots.

    Parameters
    ----------
    config : ScenarioConfig
    out_dir : path-like, optional
        When given (or set in ``config.output.directory``), snapshots
        ``snap_<step>.csv`` and ``diagnostics.csv`` are written there.
    keep_snapshots : bool
        Keep snapshot arrays in memory in ``RunResult.snapshots``.
    track_jacobians_until : float, optional
        Record ``max |J - 1|`` over all steps with ``t`` up to this time.
    callback : callable, optional
        Called as ``callback(step, pair)`` after every step.

    Step failures (mesh inversion, solver breakdown) do not raise; they are
    reported through ``status``, ``failed_step`` and ``error``.
    """
    out_dir = out_dir if out_dir is not None else config.output.directory
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    model = config.model()
    mesh = config.mesh
    mass = assemble_lumped_mass(mesh, config.material)
    pair = config.initial_pair()
    result = RunResult(config, pair)
    solver = MidpointSolver(model, config.solver) if config.integrator == "midpoint" else None
    f_prev = None
    contacts = config.constraints.contacts
    out = config.output

    offset = config.initial.level_offset

    def record(step, pair):
        # ``step`` is the time level of ``pair.prev``
        if step < 0:
            return
        t = step * config.dt
        if step % out.diagnostics_stride == 0 or step == config.steps:
            result.diagnostics.append(diagnostics_record(t, pair, model))
        if step % out.snapshot_stride == 0 or step == config.steps:
            if keep_snapshots:
                result.snapshots[step] = pair.prev.copy()
            if out_dir is not None:
                write_snapshot(out_dir / f"snap_{step}.csv", mesh, pair.prev)
        if track_jacobians_until is not None and t <= track_jacobians_until + 1e-12:
            dev = float(np.max(np.abs(all_jacobians(mesh, pair.prev) - 1.0)))
            result.max_jacobian_deviation = max(result.max_jacobian_deviation, dev)
        for k, c in enumerate(contacts):
            result.max_penetration[k] = max(result.max_penetration[k], max_penetration([c], pair.prev))

    step = offset
    try:
        record(offset, pair)
        for step in range(offset + 1, config.steps + 1):
            if solver is None:
                pair = step_explicit(pair, model, mass)
            else:
                pair, f_prev = solver.step(pair, f_prev)
            result.pair = pair
            result.steps_completed = max(step, 0)
            record(step, pair)
            if callback is not None:
                callback(step, pair)
    except SimulationError as exc:
        result.status = "failed"
        result.failed_step = step
        result.error = exc
        log.warning("%s: step %d failed: %s", config.name, step, exc)
    if out_dir is not None:
        write_diagnostics_csv(out_dir / "diagnostics.csv", result.diagnostics, mesh.dim)
    return result


# -- convergence studies -------------------------------------------------------------


def _level_config(base: ScenarioConfig, axis: str, h: float, t_final: float, momentum=None):
    if axis == "time":
        steps = round(t_final / h)
        if not np.isclose(steps * h, t_final, rtol=1e-9):
            raise ValueError(f"time step {h} does not divide t_final {t_final}")
        return replace(base, dt=h, steps=steps)
    if axis != "space":
        raise ValueError(f"axis must be 'time' or 'space', got {axis!r}")
    extent = base.mesh.extent
    cells = tuple(round(e / h) for e in extent)
    if not all(np.isclose(c * h, e, rtol=1e-9) for c, e in zip(cells, extent)):
        raise ValueError(f"spacing {h} does not divide the domain {extent}")
    cfg = replace(base, mesh=Mesh(cells, (h,) * base.dim), steps=round(t_final / base.dt))
    if momentum is not None and isinstance(cfg.initial, BoundaryVelocityProfile):
        # keep the total initial momentum equal to that of the base resolution
        norm = float(np.linalg.norm(cfg.initial_momentum()))
        if norm > 0:
            scale = float(np.linalg.norm(momentum)) / norm
            cfg = replace(cfg, initial=replace(cfg.initial, scale=cfg.initial.scale * scale))
    return cfg


def _run_final(config: ScenarioConfig):
    res = run_scenario(config, keep_snapshots=False)
    return res.positions, res.status, res.failed_step, str(res.error) if res.error else None


def worker_count() -> int:
    env = os.environ.get("SIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring invalid SIM_THREADS=%r", env)
    return os.cpu_count() or 1


@dataclass
class StudyResult:
    report: ConvergenceReport
    configs: list
    reference_config: ScenarioConfig
    failures: list = field(default_factory=list)


def run_convergence_study(
    base: ScenarioConfig,
    axis: str,
    levels,
    reference: float | None = None,
    t_final: float | None = None,
    workers: int | None = None,
) -> StudyResult:
    """Errors and rates of a refinement study against a fine reference run.

    Parameters
    ----------
    base : ScenarioConfig
        Template; its time step (space axis) or mesh (time axis) is kept.
    axis : {"time", "space"}
    levels : sequence of float
        Halving sequence of time steps or spacings.
    reference : float, optional
        Resolution of the reference run; defaults to half the finest level.
    t_final : float, optional
        Comparison time; defaults to the base run's duration.
    workers : int, optional
        Process count; defaults to ``SIM_THREADS`` or the CPU count.

    Every level and the reference use the same initial-condition
    construction.  For the space axis, boundary velocity profiles are
    rescaled so the total initial momentum equals that of ``base``.
    """
    levels = [float(h) for h in levels]
    if reference is None:
        reference = levels[-1] / 2
    if reference >= min(levels):
        raise ValueError("reference resolution must be finer than all levels")
    t_final = base.duration if t_final is None else t_final
    momentum = base.initial_momentum() if axis == "space" else None
    configs = [_level_config(base, axis, h, t_final, momentum) for h in levels]
    ref_cfg = _level_config(base, axis, reference, t_final, momentum)
    all_cfgs = configs + [ref_cfg]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(all_cfgs))) as pool:
            outcomes = list(pool.map(_run_final, all_cfgs))
    else:
        outcomes = [_run_final(c) for c in all_cfgs]
    failures = [(c.name, h, step, err) for c, h, (_, st, step, err) in zip(all_cfgs, levels + [reference], outcomes) if st != "ok"]
    if failures:
        raise SimulationError(f"convergence study aborted, failed runs: {failures}")
    ref = outcomes[-1][0]
    errors = []
    for cfg, (pos, *_rest) in zip(configs, outcomes[:-1]):
        target = ref if axis == "time" else restrict_to_coarse(ref, ref_cfg.mesh, cfg.mesh)
        errors.append(l2_error(pos, target))
    report = convergence_rates(errors, h=levels)
    return StudyResult(report, configs, ref_cfg)


def run_builtin_study(name: str, axis: str, n_levels: int | None = None, workers=None) -> StudyResult:
    from .scenarios import study

    spec = study(name, axis)
    levels = spec.levels if n_levels is None else spec.levels[:n_levels]
    return run_convergence_study(spec.base, axis, levels, spec.reference, spec.t_final, workers)


def records_array(records: list[DiagnosticsRecord]) -> np.ndarray:
    """Diagnostics as a 2D array with the CSV column layout."""
    return np.array([r.row() for r in records])
