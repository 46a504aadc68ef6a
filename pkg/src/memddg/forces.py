"""Exact shape derivatives (forces) and chemical derivatives (potentials).

Each force is the literal negative gradient of the matching energy term with
respect to vertex positions — assembled from the per-halfedge curvature
vectors and primitive derivatives, never from smooth-theory shortcuts — so a
Taylor remainder test against the energy converges at second order by
construction.  All forces are integrated quantities (nN); divide by dual
areas only for diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import (
    CurvatureVectors,
    accumulate_to_vertices,
    cotan_laplacian,
    curvature_vectors,
    vertex_mean_curvature,
)
from .derivatives import (
    closure_volume_gradient,
    edge_diamond,
    integrated_vertex_normals,
    volume_gradient,
)
from .energy import (
    osmotic_pressure,
    needs_volume,
    protein_modulated_properties,
    surface_tension,
)
from .geometry import Measures, enclosed_volume, measure
from .halfedge import HalfedgeMesh, MeshError
from .parameters import (
    BoundaryCondition,
    MembraneParameters,
    RegularizationWeights,
    ReservoirSpec,
)
from .state import SystemState


class MissingReference(MeshError):
    """Regularization requested without reference measurements."""


@dataclass
class ForceBreakdown:
    """Per-vertex integrated force terms (V, 3) in nN."""

    f_b: np.ndarray
    f_s: np.ndarray
    f_p: np.ndarray
    f_d: np.ndarray
    f_a: np.ndarray
    f_reg: np.ndarray
    f_ext: np.ndarray

    @property
    def net(self) -> np.ndarray:
        return self.f_b + self.f_s + self.f_p + self.f_d + self.f_a + self.f_reg + self.f_ext


@dataclass
class ChemicalPotential:
    """Per-vertex integrated chemical potentials (µm·nN per unit φ)."""

    mu_b: np.ndarray
    mu_a: np.ndarray
    mu_d: np.ndarray
    mu_barrier: np.ndarray

    @property
    def net(self) -> np.ndarray:
        return self.mu_b + self.mu_a + self.mu_d + self.mu_barrier


@dataclass(frozen=True)
class ReferenceMetrics:
    """Frozen mesh-quality reference for the regularization penalties."""

    edge_length: np.ndarray
    face_area: np.ndarray
    cross_ratio: np.ndarray

    @classmethod
    def from_mesh(cls, mesh: HalfedgeMesh, positions: np.ndarray) -> "ReferenceMetrics":
        m = measure(mesh, positions)
        return cls(
            edge_length=m.edge_length.copy(),
            face_area=m.face_area.copy(),
            cross_ratio=length_cross_ratios(mesh, m),
        )


def length_cross_ratios(mesh: HalfedgeMesh, m: Measures) -> np.ndarray:
    """(E,) scale-invariant conformality measure per edge.

    For the diamond (u, v, k, l) of an interior edge this is
    (l_ul·l_vk)/(l_ku·l_vl); boundary edges get 1 (no penalty contribution).
    """
    dia = edge_diamond(mesh)
    interior = ~mesh.edge_is_boundary
    out = np.ones(mesh.n_edges)
    r = m.positions
    u, v, k, l = (dia[interior, s] for s in range(4))
    l_ul = np.linalg.norm(r[u] - r[l], axis=1)
    l_vk = np.linalg.norm(r[v] - r[k], axis=1)
    l_ku = np.linalg.norm(r[k] - r[u], axis=1)
    l_vl = np.linalg.norm(r[v] - r[l], axis=1)
    out[interior] = (l_ul * l_vk) / (l_ku * l_vl)
    return out


def bending_force(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
    vec: CurvatureVectors | None = None,
) -> np.ndarray:
    """Exact −∇E_b via the per-halfedge curvature vectors.

    The weights mix tail (i) and head (j) vertex properties; heterogeneous
    κ and H̄ need no special treatment because every vector already carries
    its own chain-rule factor.
    """
    if m is None:
        m = measure(mesh, positions)
    if vec is None:
        vec = curvature_vectors(mesh, m)
    kappa, hbar = protein_modulated_properties(phi, params, clamp=True)
    h = vertex_mean_curvature(mesh, m) / m.vertex_dual_area
    dev = h - hbar  # (V,)

    i = mesh.origin
    j = mesh.halfedge_target
    w_gauss = kappa[i] * dev[i] + kappa[j] * dev[j]
    w_mean = (
        kappa[i] * dev[i] * (h[i] + hbar[i]) / 3.0
        + 2.0 * kappa[j] * dev[j] * (h[j] + hbar[j]) / 3.0
    )
    per_he = (
        -w_gauss[:, None] * vec.gauss
        + w_mean[:, None] * vec.twice_mean
        - (kappa[i] * dev[i])[:, None] * vec.s1
        - (kappa[j] * dev[j])[:, None] * vec.s2
    )
    return accumulate_to_vertices(mesh, per_he)


def capillary_force(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    params: MembraneParameters,
    reservoir: ReservoirSpec | None = None,
    m: Measures | None = None,
    vec: CurvatureVectors | None = None,
) -> np.ndarray:
    """−λ·Σ∫2H⃗ per vertex; exact for both tension laws since dE_s/dA = λ."""
    if m is None:
        m = measure(mesh, positions)
    if params.lambda_fixed is None and params.K_A == 0.0:
        return np.zeros((mesh.n_vertices, 3))
    lam = surface_tension(float(m.face_area.sum()), params, reservoir)
    if lam == 0.0:
        return np.zeros((mesh.n_vertices, 3))
    if vec is None:
        vec = curvature_vectors(mesh, m)
    return -lam * accumulate_to_vertices(mesh, vec.twice_mean)


def osmotic_force(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    params: MembraneParameters,
    reservoir: ReservoirSpec | None = None,
    m: Measures | None = None,
) -> np.ndarray:
    """ΔP·∇V per vertex.

    Closed meshes use the integrated vertex normals; open meshes add the
    exact gradient of the planar-cap closure so the force stays the true
    energy gradient on patches.
    """
    if not needs_volume(params):
        return np.zeros((mesh.n_vertices, 3))
    vol = enclosed_volume(mesh, positions)
    dp = osmotic_pressure(vol, params, reservoir)
    if mesh.is_closed:
        if m is None:
            m = measure(mesh, positions)
        grad_v = integrated_vertex_normals(mesh, m)
    else:
        grad_v = volume_gradient(mesh, positions) + closure_volume_gradient(
            mesh, positions
        )
    return dp * grad_v


def adsorption_force(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
    vec: CurvatureVectors | None = None,
) -> np.ndarray:
    """Exact −∇E_a: covered dual area grows along the curvature vectors.

    Per halfedge the weight blends tail and head coverage as φ_i/3 + 2φ_j/3
    (the dual-area chain rule); for uniform φ this reduces to the familiar
    −2εφ·∫H⃗ per vertex.
    """
    if params.epsilon == 0.0:
        return np.zeros((mesh.n_vertices, 3))
    if m is None:
        m = measure(mesh, positions)
    if vec is None:
        vec = curvature_vectors(mesh, m)
    phi = np.asarray(phi, dtype=np.float64)
    w = phi[mesh.origin] / 3.0 + 2.0 * phi[mesh.halfedge_target] / 3.0
    return -params.epsilon * accumulate_to_vertices(mesh, w[:, None] * vec.twice_mean)


def line_tension_force(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
) -> np.ndarray:
    """Exact −∇E_d through the corner-cotangent form of the Dirichlet energy.

    E_d = (η/4)·Σ_faces Σ_corners cot θ_c (δφ_opposite)², so the only shape
    dependence is through the corner angles and the force follows from the
    corner-angle gradients with d cot θ = −dθ/sin²θ.
    """
    if params.eta == 0.0:
        return np.zeros((mesh.n_vertices, 3))
    if m is None:
        m = measure(mesh, positions)
    from .derivatives import corner_angle_gradients

    cag = corner_angle_gradients(mesh, m)
    phi = np.asarray(phi, dtype=np.float64)
    f = mesh.faces
    out = np.zeros((mesh.n_vertices, 3))
    sin2 = np.sin(m.corner_angle) ** 2
    sin2 = np.where(sin2 > 0.0, sin2, 1.0)
    for c in range(3):
        dphi = phi[f[:, (c + 1) % 3]] - phi[f[:, (c + 2) % 3]]
        coef = 0.25 * params.eta * dphi**2 / sin2[:, c]
        for d in range(3):
            np.add.at(out, f[:, d], coef[:, None] * cag[:, c, d])
    return out


def chemical_potentials(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    m: Measures | None = None,
    barrier_strength: float = 0.0,
) -> ChemicalPotential:
    """Integrated potentials μ = −∂E/∂φ_i driving φ̇ = B·μ.

    μ_a = −ε·A_i is linear and therefore machine-exact; μ_d = −η·(Lφ)_i;
    the optional log-barrier keeps φ interior to (0, 1).
    """
    if m is None:
        m = measure(mesh, positions)
    phi = np.asarray(phi, dtype=np.float64)
    kappa, hbar = protein_modulated_properties(phi, params, clamp=True)
    a = m.vertex_dual_area
    h = vertex_mean_curvature(mesh, m) / a
    dev = h - hbar
    mu_b = a * (2.0 * kappa * dev * params.hbar_c - params.kappa_c * dev**2)
    mu_a = -params.epsilon * a
    if params.eta != 0.0:
        mu_d = -params.eta * (cotan_laplacian(mesh, m) @ phi)
    else:
        mu_d = np.zeros(mesh.n_vertices)
    if barrier_strength > 0.0:
        safe_lo = np.where(phi > 0.0, phi, np.nan)
        safe_hi = np.where(phi < 1.0, 1.0 - phi, np.nan)
        mu_barrier = barrier_strength * (1.0 / safe_lo - 1.0 / safe_hi)
        mu_barrier = np.nan_to_num(mu_barrier, nan=0.0, posinf=0.0, neginf=0.0)
    else:
        mu_barrier = np.zeros(mesh.n_vertices)
    return ChemicalPotential(mu_b=mu_b, mu_a=mu_a, mu_d=mu_d, mu_barrier=mu_barrier)


def barrier_energy(
    mesh: HalfedgeMesh, phi: np.ndarray, barrier_strength: float
) -> float:
    """−s·Σ[ln φ + ln(1−φ)]; +inf outside the open interval."""
    if barrier_strength <= 0.0:
        return 0.0
    phi = np.asarray(phi, dtype=np.float64)
    if phi.min() <= 0.0 or phi.max() >= 1.0:
        return float("inf")
    return float(-barrier_strength * np.sum(np.log(phi) + np.log1p(-phi)))


def regularization_energy(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    reference: ReferenceMetrics | None,
    weights: RegularizationWeights,
    m: Measures | None = None,
) -> float:
    """Quadratic mesh-quality penalties matching `regularization_forces`."""
    if not weights.any_active:
        return 0.0
    if reference is None:
        raise MissingReference("regularization weights set but no reference metrics")
    if m is None:
        m = measure(mesh, positions)
    e = 0.0
    if weights.K_e > 0.0:
        d = m.edge_length - reference.edge_length
        e += 0.5 * weights.K_e * float(np.sum(d**2 / reference.edge_length))
    if weights.K_f > 0.0:
        ref = np.where(reference.face_area > 0.0, reference.face_area, 1.0)
        d = m.face_area - reference.face_area
        e += 0.5 * weights.K_f * float(np.sum(d**2 / ref))
    if weights.K_c > 0.0:
        d = length_cross_ratios(mesh, m) - reference.cross_ratio
        e += 0.5 * weights.K_c * float(np.sum(d**2))
    return e


def regularization_forces(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    reference: ReferenceMetrics | None,
    weights: RegularizationWeights,
    m: Measures | None = None,
) -> np.ndarray:
    """Exact negative gradients of the three quadratic quality penalties."""
    if not weights.any_active:
        return np.zeros((mesh.n_vertices, 3))
    if reference is None:
        raise MissingReference("regularization weights set but no reference metrics")
    if m is None:
        m = measure(mesh, positions)
    if reference.edge_length.shape != m.edge_length.shape or (
        reference.face_area.shape != m.face_area.shape
    ):
        raise MissingReference(
            "reference metrics sized for a different mesh; re-measure after mutations"
        )
    r = m.positions
    out = np.zeros((mesh.n_vertices, 3))

    if weights.K_e > 0.0:
        l = np.where(m.edge_length > 0.0, m.edge_length, 1.0)
        coef = weights.K_e * (m.edge_length - reference.edge_length) / reference.edge_length
        unit = m.edge_vector / l[:, None]
        np.add.at(out, mesh.edges[:, 0], coef[:, None] * unit)
        np.add.at(out, mesh.edges[:, 1], -coef[:, None] * unit)

    if weights.K_f > 0.0:
        from .derivatives import face_area_gradients

        fag = face_area_gradients(mesh, m)
        ref = np.where(reference.face_area > 0.0, reference.face_area, 1.0)
        coef = weights.K_f * (m.face_area - reference.face_area) / ref
        for c in range(3):
            np.add.at(out, mesh.faces[:, c], -coef[:, None] * fag[:, c])

    if weights.K_c > 0.0:
        dia = edge_diamond(mesh)
        interior = np.flatnonzero(~mesh.edge_is_boundary)
        lam = length_cross_ratios(mesh, m)
        coef = weights.K_c * (lam - reference.cross_ratio) * lam
        u, v, k, l = (dia[interior, s] for s in range(4))
        ce = coef[interior]
        # ∇λ/λ = Σ ±∇l/l over the four flank edges (+ul, +vk, −ku, −vl)
        for a, b, sign in ((u, l, 1.0), (v, k, 1.0), (k, u, -1.0), (v, l, -1.0)):
            d = r[a] - r[b]
            l2 = np.einsum("ij,ij->i", d, d)
            g = (sign * ce / l2)[:, None] * d
            np.add.at(out, a, -g)
            np.add.at(out, b, g)
    return out


def force_breakdown(
    state: SystemState,
    mesh: HalfedgeMesh,
    params: MembraneParameters,
    reservoir: ReservoirSpec | None = None,
    reg_reference: ReferenceMetrics | None = None,
    reg_weights: RegularizationWeights | None = None,
    f_ext: np.ndarray | None = None,
    m: Measures | None = None,
) -> ForceBreakdown:
    """Assemble all force terms, sharing one set of measures and vectors."""
    if m is None:
        m = measure(mesh, state.positions)
    vec = curvature_vectors(mesh, m)
    zeros = np.zeros((mesh.n_vertices, 3))
    if reg_weights is not None and reg_weights.any_active:
        f_reg = regularization_forces(mesh, state.positions, reg_reference, reg_weights, m=m)
    else:
        f_reg = zeros.copy()
    return ForceBreakdown(
        f_b=bending_force(mesh, state.positions, state.phi, params, m=m, vec=vec),
        f_s=capillary_force(mesh, state.positions, params, reservoir, m=m, vec=vec),
        f_p=osmotic_force(mesh, state.positions, params, reservoir, m=m),
        f_d=line_tension_force(mesh, state.positions, state.phi, params, m=m),
        f_a=adsorption_force(mesh, state.positions, state.phi, params, m=m, vec=vec),
        f_reg=f_reg,
        f_ext=zeros.copy() if f_ext is None else np.asarray(f_ext, dtype=np.float64),
    )


def apply_boundary_masks(
    forces: ForceBreakdown,
    potentials: ChemicalPotential | None,
    bcs: BoundaryCondition | list[BoundaryCondition] | None,
    mesh: HalfedgeMesh,
) -> tuple[ForceBreakdown, ChemicalPotential | None]:
    """Zero constrained force components and pinned-φ potentials in place of
    free evolution; masked entries are exactly zero."""
    from .boundary import build_masks

    force_mask, phi_pinned, _ = build_masks(mesh, bcs)
    masked = ForceBreakdown(
        f_b=forces.f_b * force_mask,
        f_s=forces.f_s * force_mask,
        f_p=forces.f_p * force_mask,
        f_d=forces.f_d * force_mask,
        f_a=forces.f_a * force_mask,
        f_reg=forces.f_reg * force_mask,
        f_ext=forces.f_ext * force_mask,
    )
    if potentials is None:
        return masked, None
    keep = (~phi_pinned).astype(np.float64)
    masked_mu = ChemicalPotential(
        mu_b=potentials.mu_b * keep,
        mu_a=potentials.mu_a * keep,
        mu_d=potentials.mu_d * keep,
        mu_barrier=potentials.mu_barrier * keep,
    )
    return masked, masked_mu
