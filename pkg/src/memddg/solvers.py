"""Time integration and energy minimization.

Shape dynamics are overdamped: ṙ = (1/ξ)·∫f⃗_net, integrated with forward
Euler under a backtracking line search so accepted steps never increase the
objective.  Minimization uses nonlinear conjugate gradient (Polak–Ribière+)
with periodic steepest-descent restarts.  Protein dynamics follow φ̇ = B·μ
with a log-barrier keeping φ strictly inside (0, 1); coupled stepping is
operator splitting with a shared, adaptive dt.
"""
from __future__ import annotations

import logging
import time as _time
from dataclasses import dataclass

import numpy as np

from .boundary import build_masks
from .energy import EnergyBreakdown, total_energy
from .forces import (
    ChemicalPotential,
    ReferenceMetrics,
    barrier_energy,
    chemical_potentials,
    force_breakdown,
    regularization_energy,
)
from .geometry import measure, total_area
from .halfedge import HalfedgeMesh, MeshError
from .parameters import (
    BoundaryCondition,
    MembraneParameters,
    RegularizationWeights,
    ReservoirSpec,
    SolverConfig,
)
from .state import SystemState

log = logging.getLogger(__name__)


class LineSearchFailed(MeshError):
    """Backtracking shrank dt below useful precision without decrease."""


class PhiOutOfBounds(MeshError):
    """φ left (0,1) with the interior-point barrier disabled."""


class LengthMismatch(ValueError):
    """Field comparison over differently sized arrays."""


def l2_residual(forces: np.ndarray) -> float:
    """Frobenius norm of the (V, 3) force matrix."""
    return float(np.linalg.norm(np.asarray(forces)))


def l1_field_error(a: np.ndarray, ref: np.ndarray, area_total: float) -> float:
    """Scale-invariant L1 deviation Σ|∫a_i − ∫ā_i| / A.

    Vector fields compare by per-vertex Euclidean norm of the difference.
    """
    a = np.asarray(a, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if a.shape != ref.shape:
        raise LengthMismatch(f"field shapes differ: {a.shape} vs {ref.shape}")
    diff = a - ref
    if diff.ndim == 2:
        per_vertex = np.linalg.norm(diff, axis=1)
    else:
        per_vertex = np.abs(diff)
    return float(per_vertex.sum() / area_total)


@dataclass(frozen=True)
class TerminationReport:
    reason: str  # "converged" | "max_steps" | "error"
    residual: float
    steps: int
    wall_time: float


@dataclass
class System:
    """Everything a solver needs besides the state: mesh, constitutive
    parameters, boundary conditions, reservoir, regularization."""

    mesh: HalfedgeMesh
    params: MembraneParameters
    bcs: BoundaryCondition | list[BoundaryCondition] | None = None
    reservoir: ReservoirSpec | None = None
    reg_weights: RegularizationWeights | None = None
    reg_reference: ReferenceMetrics | None = None
    f_ext: np.ndarray | None = None

    def refresh_reference(self, positions: np.ndarray) -> None:
        if self.reg_weights is not None and self.reg_weights.any_active:
            self.reg_reference = ReferenceMetrics.from_mesh(self.mesh, positions)


def _objective(state: SystemState, system: System, barrier_strength: float = 0.0):
    """Total energy + regularization (+ φ barrier) and the breakdown."""
    br = total_energy(state, system.mesh, system.params, system.reservoir)
    e = br.total
    if system.reg_weights is not None and system.reg_weights.any_active:
        e += regularization_energy(
            system.mesh, state.positions, system.reg_reference, system.reg_weights
        )
    if barrier_strength > 0.0:
        e += barrier_energy(system.mesh, state.phi, barrier_strength)
    return e, br


def _masked_net_force(state: SystemState, system: System) -> np.ndarray:
    fb = force_breakdown(
        state,
        system.mesh,
        system.params,
        reservoir=system.reservoir,
        reg_reference=system.reg_reference,
        reg_weights=system.reg_weights,
        f_ext=system.f_ext,
    )
    mask, _, _ = build_masks(system.mesh, system.bcs)
    return fb.net * mask


@dataclass
class StepResult:
    state: SystemState
    dt_used: float
    dt_next: float
    energy: float
    backtracks: int
    residual: float
    # (before, after) objective values for each line search taken during the
    # step, both evaluated under that search's own objective (barrier
    # included when active).  Accepted steps must satisfy after ≤ before.
    armijo_pairs: tuple = ()


def _line_search(
    state: SystemState,
    system: System,
    direction: np.ndarray,
    slope: float,
    e0: float,
    dt_start: float,
    config: SolverConfig,
    barrier_strength: float = 0.0,
) -> tuple[SystemState, float, float, int]:
    """Backtrack dt along `direction` until sufficient decrease holds.

    ``slope`` is dE/d(dt) at dt=0 (negative for a descent direction).
    Returns (new state, dt_used, new energy, backtracks).
    """
    dt = dt_start
    for k in range(config.max_backtracks + 1):
        trial = state.with_positions(state.positions + dt * direction)
        try:
            e_new, _ = _objective(trial, system, barrier_strength)
        except MeshError:
            e_new = np.inf
        if np.isfinite(e_new) and e_new <= e0 + config.sufficient_decrease * dt * slope:
            return trial, dt, e_new, k
        dt *= config.shrink
    raise LineSearchFailed(
        f"no sufficient decrease after {config.max_backtracks} backtracks "
        f"(dt={dt:.3e}, E0={e0:.6e})"
    )


def forward_euler_step(
    state: SystemState,
    mesh_or_system: HalfedgeMesh | System,
    params: MembraneParameters | None = None,
    bcs=None,
    config: SolverConfig | None = None,
    dt: float | None = None,
) -> StepResult:
    """One overdamped shape step r ← r + (dt/ξ)·∫f⃗ with line-searched dt.

    Accepts either a ``System`` or the individual (mesh, params, bcs)
    arguments.  The φ field is frozen; masked vertices never move.
    """
    system = (
        mesh_or_system
        if isinstance(mesh_or_system, System)
        else System(mesh_or_system, params, bcs)
    )
    config = config or SolverConfig()
    dt_start = dt if dt is not None else config.dt_init

    force = _masked_net_force(state, system)
    residual = l2_residual(force)
    e0, _ = _objective(state, system)
    if residual == 0.0:
        return StepResult(state.copy(), 0.0, dt_start, e0, 0, residual)
    direction = force / system.params.xi
    slope = -float(np.sum(force * direction))  # dE/ddt = −⟨f, ṙ⟩
    new_state, dt_used, e_new, backtracks = _line_search(
        state, system, direction, slope, e0, dt_start, config
    )
    dt_next = dt_used * (config.dt_growth if backtracks == 0 else 1.0)
    new_state.time = state.time + dt_used
    new_state.step = state.step + 1
    return StepResult(
        new_state, dt_used, dt_next, e_new, backtracks, residual,
        armijo_pairs=((e0, e_new),),
    )


def conjugate_gradient_minimize(
    state: SystemState,
    mesh_or_system: HalfedgeMesh | System,
    params: MembraneParameters | None = None,
    bcs=None,
    config: SolverConfig | None = None,
    callback=None,
) -> tuple[SystemState, TerminationReport]:
    """Minimize total energy over positions (φ frozen) with PR+ NCG.

    The direction resets to steepest descent on nonpositive β, on loss of
    descent, and every ``cg_restart_period`` iterations; every accepted step
    passes the same sufficient-decrease test as forward Euler, so energy is
    monotone nonincreasing.
    """
    system = (
        mesh_or_system
        if isinstance(mesh_or_system, System)
        else System(mesh_or_system, params, bcs)
    )
    config = config or SolverConfig()
    t0 = _time.perf_counter()

    cur = state.copy()
    force = _masked_net_force(cur, system)
    residual = l2_residual(force)
    e_cur, _ = _objective(cur, system)
    g = -force  # gradient of the objective, masked
    d = force.copy()
    dt = config.dt_init
    steps = 0
    while steps < config.max_steps:
        if residual <= config.tolerance:
            return cur, TerminationReport(
                "converged", residual, steps, _time.perf_counter() - t0
            )
        slope = float(np.sum(g * d))
        if slope >= 0.0 or steps % max(1, config.cg_restart_period) == 0:
            d = force.copy()
            slope = -float(np.sum(force * force))
            if slope == 0.0:
                return cur, TerminationReport(
                    "converged", residual, steps, _time.perf_counter() - t0
                )
        try:
            cur, dt_used, e_cur, backtracks = _line_search(
                cur, system, d, slope, e_cur, dt, config
            )
        except LineSearchFailed:
            if np.array_equal(d, force):
                return cur, TerminationReport(
                    "error", residual, steps, _time.perf_counter() - t0
                )
            d = force.copy()  # retry once along steepest descent
            continue
        dt = dt_used * (config.dt_growth if backtracks == 0 else 1.0)
        steps += 1
        cur.step = state.step + steps

        new_force = _masked_net_force(cur, system)
        g_new = -new_force
        beta = max(
            0.0,
            float(np.sum(g_new * (g_new - g)) / max(np.sum(g * g), 1e-300)),
        )
        d = new_force + beta * d
        g, force = g_new, new_force
        residual = l2_residual(force)
        if callback is not None:
            callback(cur, residual, e_cur)
    return cur, TerminationReport(
        "max_steps", residual, steps, _time.perf_counter() - t0
    )


def _effective_barrier(
    mu: ChemicalPotential, phi: np.ndarray, strength: float
) -> float:
    """Halve the barrier while it dominates the physical potential at any
    vertex comfortably interior to [0.05, 0.95]."""
    interior = (phi >= 0.05) & (phi <= 0.95)
    if not interior.any():
        return strength
    physical = np.abs(mu.mu_b + mu.mu_a + mu.mu_d)[interior]
    phi_in = phi[interior]
    for _ in range(60):
        bar = np.abs(strength * (1.0 / phi_in - 1.0 / (1.0 - phi_in)))
        if not np.any(bar > np.maximum(physical, 1e-300)):
            break
        strength *= 0.5
    return strength


def evolve_protein(
    state: SystemState,
    mesh_or_system: HalfedgeMesh | System,
    params: MembraneParameters | None = None,
    bcs=None,
    config: SolverConfig | None = None,
    dt: float | None = None,
) -> StepResult:
    """One protein step φ ← φ + dt·B·μ with the shape frozen.

    The barrier keeps φ interior; dt backtracks (on the barrier-augmented
    energy) whenever the explicit step would overshoot.  Dirichlet-pinned
    vertices keep their φ exactly.
    """
    system = (
        mesh_or_system
        if isinstance(mesh_or_system, System)
        else System(mesh_or_system, params, bcs)
    )
    config = config or SolverConfig()
    dt_start = dt if dt is not None else config.dt_init
    if system.params.B == 0.0:
        e0, _ = _objective(state, system, config.barrier_strength)
        return StepResult(state.copy(), 0.0, dt_start, e0, 0, 0.0)

    m = measure(system.mesh, state.positions)
    mu = chemical_potentials(
        system.mesh, state.positions, state.phi, system.params, m=m
    )
    strength = _effective_barrier(mu, state.phi, config.barrier_strength)
    mu = chemical_potentials(
        system.mesh,
        state.positions,
        state.phi,
        system.params,
        m=m,
        barrier_strength=strength,
    )
    _, phi_pinned, _ = build_masks(system.mesh, system.bcs)
    mu_net = mu.net * ~phi_pinned
    residual = l2_residual(mu_net)

    e0, _ = _objective(state, system, strength)
    rate = system.params.B * mu_net  # φ̇
    slope = -float(np.sum(mu_net * rate))  # dE/ddt = −⟨μ, φ̇⟩
    dt_cur = dt_start
    for k in range(config.max_backtracks + 1):
        phi_new = state.phi + dt_cur * rate
        if float(phi_new.min()) > 0.0 and float(phi_new.max()) < 1.0:
            trial = state.with_phi(phi_new)
            e_new, _ = _objective(trial, system, strength)
            if e_new <= e0 + config.sufficient_decrease * dt_cur * slope:
                out = trial.copy()
                out.time = state.time + dt_cur
                out.step = state.step + 1
                return StepResult(
                    out,
                    dt_cur,
                    dt_cur * (config.dt_growth if k == 0 else 1.0),
                    e_new,
                    k,
                    residual,
                    armijo_pairs=((e0, e_new),),
                )
        dt_cur *= config.shrink
    raise LineSearchFailed(
        f"protein step found no admissible dt (start {dt_start:.3e})"
    )


def mechanochemical_step(
    state: SystemState,
    mesh_or_system: HalfedgeMesh | System,
    params: MembraneParameters | None = None,
    bcs=None,
    config: SolverConfig | None = None,
    dt: float | None = None,
) -> StepResult:
    """Operator-split step: shape (φ frozen) then protein (shape frozen),
    the protein substep starting from the dt the shape substep accepted."""
    system = (
        mesh_or_system
        if isinstance(mesh_or_system, System)
        else System(mesh_or_system, params, bcs)
    )
    config = config or SolverConfig()
    shape = forward_euler_step(state, system, config=config, dt=dt)
    if system.params.B == 0.0:
        return shape
    chem = evolve_protein(shape.state, system, config=config, dt=shape.dt_next)
    chem.state.time = shape.state.time  # shared dt: one step advances once
    chem.state.step = shape.state.step
    return StepResult(
        chem.state,
        shape.dt_used,
        min(shape.dt_next, chem.dt_next),
        chem.energy,
        shape.backtracks + chem.backtracks,
        shape.residual,
        armijo_pairs=shape.armijo_pairs + chem.armijo_pairs,
    )


@dataclass
class ScalarRecord:
    """Per-step summary emitted to trajectories and CSV."""

    step: int
    time: float
    energy: EnergyBreakdown
    residual_mech: float
    residual_chem: float
    area: float
    volume: float
    phi_min: float
    phi_max: float


def summarize(state: SystemState, system: System, residual_mech: float, residual_chem: float) -> ScalarRecord:
    from .energy import needs_volume
    from .geometry import enclosed_volume

    m = measure(system.mesh, state.positions)
    br = total_energy(state, system.mesh, system.params, system.reservoir, m=m)
    vol = (
        enclosed_volume(system.mesh, state.positions)
        if (system.mesh.is_closed or needs_volume(system.params))
        else float("nan")
    )
    return ScalarRecord(
        step=state.step,
        time=state.time,
        energy=br,
        residual_mech=residual_mech,
        residual_chem=residual_chem,
        area=total_area(system.mesh, state.positions),
        volume=vol,
        phi_min=float(state.phi.min()),
        phi_max=float(state.phi.max()),
    )
