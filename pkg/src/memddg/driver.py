"""Run loop tying solvers, remeshing and output together.

A `RunResult` carries the final state plus per-step scalars and any mutation
log accumulated by periodic remeshing.  Remesh passes happen strictly between
solver steps; the regularization reference and boundary masks are rebuilt
afterwards, and prescribed protein profiles are re-applied on the new mesh.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .boundary import build_masks, resolve_loop_conditions
from .halfedge import HalfedgeMesh
from .parameters import RemeshConfig, SolverConfig
from .presets import ScenarioPreset, realize
from .remesh import MutationLog, remesh_pass
from .solvers import (
    System,
    TerminationReport,
    conjugate_gradient_minimize,
    evolve_protein,
    forward_euler_step,
    mechanochemical_step,
    summarize,
)
from .state import SystemState

__all__ = ["RunResult", "run_preset", "run_dynamics"]


@dataclass
class RunResult:
    preset_name: str
    mesh: HalfedgeMesh
    state: SystemState
    system: System
    report: TerminationReport
    records: list = field(default_factory=list)
    mutations: MutationLog = field(default_factory=MutationLog)
    frames: list = field(default_factory=list)  # (time, mesh_changed) markers
    energy_trace: list = field(default_factory=list)
    # Worst (after − before) over every accepted line search; ≤ 0 means all
    # accepted steps decreased their objective.
    worst_increase: float = -np.inf
    # Extremes of φ seen at any step of the trajectory.
    phi_min: float = np.inf
    phi_max: float = -np.inf


def _protected_vertices(system: System) -> np.ndarray | None:
    """Vertices remeshing must not move: anything with a masked force row."""
    if system.bcs is None:
        return None
    mask, phi_pinned, _ = build_masks(system.mesh, system.bcs)
    prot = ~np.all(mask, axis=1) | phi_pinned
    return prot if prot.any() else None


def _remesh_now(
    state: SystemState, system: System, preset: ScenarioPreset | None
) -> tuple[SystemState, System, MutationLog]:
    cfg = preset.remesh if preset is not None else RemeshConfig()
    new_mesh, new_state, log = remesh_pass(
        state, system.mesh, cfg, protected=_protected_vertices(system)
    )
    bcs = system.bcs
    if bcs is not None and len(new_mesh.boundary_loops) != len(system.mesh.boundary_loops):
        bcs = resolve_loop_conditions(new_mesh, None)
    # External loads are defined per-vertex on the old mesh and do not
    # transfer across a topology change.
    new_system = System(
        mesh=new_mesh,
        params=system.params,
        bcs=bcs,
        reservoir=system.reservoir,
        reg_weights=system.reg_weights,
    )
    new_system.refresh_reference(new_state.positions)
    if preset is not None and preset.protein.kind == "geodesic-disk":
        new_state = new_state.with_phi(preset.protein.build(new_mesh, new_state.positions))
    return new_state, new_system, log


def run_dynamics(
    state: SystemState,
    system: System,
    config: SolverConfig,
    *,
    mode: str = "dynamics",
    duration: float = 0.0,
    preset: ScenarioPreset | None = None,
    record_every: int | None = None,
    quiet: bool = True,
    sink=None,
) -> RunResult:
    """Step the system until ``duration`` (sim time) or max_steps.

    mode ∈ {dynamics, coupled, protein}; remeshing runs every
    ``config.remesh_period`` accepted steps when the period is positive.
    ``sink(t, mesh, state)``, when given, receives the initial state, every
    recorded step, every post-remesh state, and the final state.
    """
    steppers = {
        "dynamics": forward_euler_step,
        "coupled": mechanochemical_step,
        "protein": evolve_protein,
    }
    stepper = steppers[mode]
    result = RunResult(
        preset_name=preset.name if preset is not None else "",
        mesh=system.mesh,
        state=state,
        system=system,
        report=TerminationReport(reason="max_steps", residual=np.nan, steps=0, wall_time=0.0),
    )
    every = record_every if record_every is not None else max(1, config.output_period)
    st, dtn = state, None
    t0 = time.perf_counter()
    steps = 0
    residual = np.nan
    last_sunk = -1
    if sink is not None:
        sink(st.time, system.mesh, st)
        last_sunk = 0
    for k in range(config.max_steps):
        if duration > 0.0 and st.time >= duration:
            result.report = TerminationReport(
                reason="converged", residual=residual, steps=steps,
                wall_time=time.perf_counter() - t0,
            )
            break
        if (
            config.remesh_period > 0
            and k > 0
            and k % config.remesh_period == 0
        ):
            st, system, log = _remesh_now(st, system, preset)
            result.mutations.extend(log)
            result.frames.append((st.time, True))
            if sink is not None:
                sink(st.time, system.mesh, st)
                last_sunk = steps
            # dt carries over: the line search shrinks it if the new mesh
            # cannot take a step that large.
        res = stepper(st, system, config=config, dt=dtn)
        st, dtn = res.state, res.dt_next
        residual = res.residual
        steps += 1
        result.energy_trace.append(float(res.energy))
        for before, after in res.armijo_pairs:
            result.worst_increase = max(result.worst_increase, after - before)
        result.phi_min = min(result.phi_min, float(st.phi.min()))
        result.phi_max = max(result.phi_max, float(st.phi.max()))
        if steps % every == 0:
            if mode == "protein":
                result.records.append(summarize(st, system, np.nan, residual))
            else:
                result.records.append(summarize(st, system, residual, np.nan))
            if sink is not None:
                sink(st.time, system.mesh, st)
                last_sunk = steps
        if residual <= config.tolerance:
            result.report = TerminationReport(
                reason="converged", residual=residual, steps=steps,
                wall_time=time.perf_counter() - t0,
            )
            break
    else:
        result.report = TerminationReport(
            reason="max_steps", residual=residual, steps=steps,
            wall_time=time.perf_counter() - t0,
        )
    if sink is not None and last_sunk != steps:
        sink(st.time, system.mesh, st)
    result.mesh = system.mesh
    result.state = st
    result.system = system
    return result


def run_preset(
    preset: ScenarioPreset,
    *,
    record_every: int | None = None,
    quiet: bool = True,
    sink=None,
) -> RunResult:
    """Realize and execute a preset according to its run mode."""
    mesh, state, system = realize(preset)
    if preset.run_mode == "minimize":
        energies = []
        every = record_every if record_every is not None else max(1, preset.solver.output_period)
        if sink is not None:
            sink(state.time, system.mesh, state)

        def track(st, residual, energy):
            energies.append(float(energy))
            if sink is not None and len(energies) % every == 0:
                sink(st.time, system.mesh, st)

        final, report = conjugate_gradient_minimize(
            state, system, config=preset.solver, callback=track
        )
        if sink is not None and len(energies) % every != 0:
            sink(final.time, system.mesh, final)
        result = RunResult(
            preset_name=preset.name,
            mesh=system.mesh,
            state=final,
            system=system,
            report=report,
            energy_trace=energies,
        )
        if len(energies) > 1:
            diffs = np.diff(np.asarray(energies))
            result.worst_increase = float(diffs.max())
        result.records.append(summarize(final, system, report.residual, np.nan))
        return result
    return run_dynamics(
        state,
        system,
        preset.solver,
        mode=preset.run_mode,
        duration=preset.duration,
        preset=preset,
        record_every=record_every,
        quiet=quiet,
        sink=sink,
    )
