"""Scalar energies of the membrane model.

Every term is written against integrated mesh quantities so that the force
module's shape derivatives are exact gradients of the values computed here.
Area and volume passed to the scalar laws are bare membrane measurements;
reservoir contributions are added inside so open patches see whole-system
tension and pressure.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .curvature import face_surface_gradient, vertex_mean_curvature
from .geometry import Measures, enclosed_volume, measure
from .halfedge import HalfedgeMesh, MeshError
from .parameters import MembraneParameters, ReservoirSpec
from .state import SystemState

log = logging.getLogger(__name__)


class MissingPreferredArea(MeshError):
    """The elastic tension law needs A_bar but none was provided."""


class NonPositiveVolume(MeshError):
    """The osmotic law is undefined for V ≤ 0."""


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-term energies (µm·nN); ``total`` is the scalar solvers minimize."""

    E_b: float = 0.0
    E_s: float = 0.0
    E_p: float = 0.0
    E_d: float = 0.0
    E_a: float = 0.0

    @property
    def total(self) -> float:
        return self.E_b + self.E_s + self.E_p + self.E_d + self.E_a


def protein_modulated_properties(
    phi: np.ndarray, params: MembraneParameters, clamp: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex rigidity κ_i = κ_b + κ_c·φ_i and spontaneous curvature
    H̄_i = H̄_0 + H̄_c·φ_i.

    With ``clamp`` the field is clipped into [0, 1] (with a logged warning)
    instead of raising; solvers keep φ interior via the barrier, so clamping
    only matters for hand-built states.
    """
    phi = np.asarray(phi, dtype=np.float64)
    lo, hi = float(phi.min()), float(phi.max())
    if lo < -1e-12 or hi > 1.0 + 1e-12:
        if not clamp:
            from .state import OutOfRangePhi

            raise OutOfRangePhi(f"phi range [{lo:.3g}, {hi:.3g}] outside [0, 1]")
        log.warning("phi outside [0,1] (range [%.3g, %.3g]); clamping", lo, hi)
        phi = np.clip(phi, 0.0, 1.0)
    kappa = params.kappa_b + params.kappa_c * phi
    hbar = params.hbar_0 + params.hbar_c * phi
    return kappa, hbar


def _system_area(area: float, reservoir: ReservoirSpec | None) -> float:
    if reservoir is not None and reservoir.enabled:
        return area + reservoir.A_r
    return area


def _system_volume(volume: float, reservoir: ReservoirSpec | None) -> float:
    if reservoir is not None and reservoir.enabled:
        return volume + reservoir.V_r
    return volume


def surface_tension(
    area: float, params: MembraneParameters, reservoir: ReservoirSpec | None = None
) -> float:
    """λ (nN/µm): prescribed ``lambda_fixed`` if set, else K_A·(A−Ā)/Ā."""
    if params.lambda_fixed is not None:
        return params.lambda_fixed
    if params.A_bar is None or params.A_bar <= 0.0:
        raise MissingPreferredArea("elastic tension requires positive A_bar")
    A = _system_area(area, reservoir)
    return params.K_A * (A - params.A_bar) / params.A_bar


def osmotic_pressure(
    volume: float, params: MembraneParameters, reservoir: ReservoirSpec | None = None
) -> float:
    """ΔP (nN/µm²): exact mixing law K_V·(1/V − c̄/n), or the derivative
    −K_V·(V−V̄)/V̄² of the quadratic penalty under the phenomenological flag."""
    V = _system_volume(volume, reservoir)
    if params.use_phenomenological_pressure:
        vbar = params.V_bar
        if vbar is None or vbar <= 0.0:
            raise NonPositiveVolume("phenomenological law requires positive V_bar")
        return -params.K_V * (V - vbar) / vbar**2
    if V <= 0.0:
        raise NonPositiveVolume(f"volume must be positive, got {V:.3g}")
    return params.K_V * (1.0 / V - params.c_bar_over_n)


def stretching_energy(
    area: float, params: MembraneParameters, reservoir: ReservoirSpec | None = None
) -> float:
    """E_s: ½K_A(A−Ā)²/Ā elastically, or λ_fixed·(A−Ā) under fixed tension."""
    A = _system_area(area, reservoir)
    a_bar = params.A_bar
    if params.lambda_fixed is not None:
        return params.lambda_fixed * (A - (a_bar if a_bar is not None else 0.0))
    if params.K_A == 0.0:
        return 0.0
    if a_bar is None or a_bar <= 0.0:
        raise MissingPreferredArea("elastic stretching requires positive A_bar")
    return 0.5 * params.K_A * (A - a_bar) ** 2 / a_bar


def pressure_energy(
    volume: float, params: MembraneParameters, reservoir: ReservoirSpec | None = None
) -> float:
    """E_p ≥ 0, zero iff isosmotic (exact law) or at V̄ (phenomenological)."""
    V = _system_volume(volume, reservoir)
    if params.use_phenomenological_pressure:
        vbar = params.V_bar
        if vbar is None or vbar <= 0.0:
            raise NonPositiveVolume("phenomenological law requires positive V_bar")
        return 0.5 * params.K_V * (V - vbar) ** 2 / vbar**2
    if params.K_V == 0.0:
        return 0.0
    if V <= 0.0:
        raise NonPositiveVolume(f"volume must be positive, got {V:.3g}")
    r_c = params.c_bar_over_n * V
    if r_c <= 0.0:
        # no ambient solute: the mixing law degenerates; treat as disabled
        return 0.0
    return params.K_V * (r_c - np.log(r_c) - 1.0)


def bending_energy(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
) -> float:
    """E_b = Σ_i κ_i(∫H_i − A_i·H̄_i)²/A_i (the Gaussian part is a
    topological constant and is omitted)."""
    if m is None:
        m = measure(mesh, positions)
    kappa, hbar = protein_modulated_properties(phi, params, clamp=True)
    int_h = vertex_mean_curvature(mesh, m)
    a = m.vertex_dual_area
    return float(np.sum(kappa * (int_h - a * hbar) ** 2 / a))


def dirichlet_energy(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
) -> float:
    """E_d = (η/2)·Σ_f A_f‖∇φ_f‖² (equal to the cotangent quadratic form)."""
    if params.eta == 0.0:
        return 0.0
    if m is None:
        m = measure(mesh, positions)
    g = face_surface_gradient(mesh, m, phi)
    return float(0.5 * params.eta * np.sum(m.face_area * np.einsum("ij,ij->i", g, g)))


def adsorption_energy(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
) -> float:
    """E_a = ε·Σ_i A_i·φ_i."""
    if params.epsilon == 0.0:
        return 0.0
    if m is None:
        m = measure(mesh, positions)
    return float(params.epsilon * np.sum(m.vertex_dual_area * np.asarray(phi)))


def needs_volume(params: MembraneParameters) -> bool:
    return params.K_V != 0.0


def total_energy(
    state: SystemState,
    mesh: HalfedgeMesh,
    params: MembraneParameters,
    reservoir: ReservoirSpec | None = None,
    m: Measures | None = None,
) -> EnergyBreakdown:
    """All energy terms at the given state.

    Volume (with planar-cap closure on open meshes) is only computed when a
    pressure law is active, so purely tensile open patches never hit the
    boundary-planarity requirement.
    """
    if m is None:
        m = measure(mesh, state.positions)
    area = float(m.face_area.sum())
    e_b = bending_energy(mesh, state.positions, state.phi, params, m=m)
    if params.lambda_fixed is not None or params.K_A != 0.0:
        e_s = stretching_energy(area, params, reservoir)
    else:
        e_s = 0.0
    if needs_volume(params):
        vol = enclosed_volume(mesh, state.positions)
        e_p = pressure_energy(vol, params, reservoir)
    else:
        e_p = 0.0
    e_d = dirichlet_energy(mesh, state.positions, state.phi, params, m=m)
    e_a = adsorption_energy(mesh, state.positions, state.phi, params, m=m)
    return EnergyBreakdown(E_b=e_b, E_s=e_s, E_p=e_p, E_d=e_d, E_a=e_a)
