"""Primitive geometric measures over a halfedge mesh.

Everything is computed in one vectorized pass and bundled in a `Measures`
value so energies and forces evaluated at the same positions share work.
Units are µm throughout; areas µm², volumes µm³.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .halfedge import BOUNDARY, HalfedgeMesh, MeshError

logger = logging.getLogger(__name__)


class DegenerateFace(MeshError):
    """A face with (numerically) zero area where one is required."""


class ZeroNormal(MeshError):
    """An angle-weighted vertex normal with vanishing magnitude."""


class NonPlanarBoundary(MeshError):
    """Open-mesh volume requested but a boundary loop is not coplanar."""


@dataclass(frozen=True)
class Measures:
    """All per-face/per-edge/per-vertex primitives at one set of positions."""

    positions: np.ndarray        # (V, 3)
    face_area: np.ndarray        # (F,)
    face_normal: np.ndarray      # (F, 3) unit; zero rows on degenerate faces
    corner_angle: np.ndarray     # (F, 3) angle at faces[f, c]
    corner_cot: np.ndarray       # (F, 3)
    edge_length: np.ndarray      # (E,)
    edge_vector: np.ndarray      # (E, 3) along the canonical halfedge
    dihedral_angle: np.ndarray   # (E,) signed, 0 on boundary edges
    vertex_dual_area: np.ndarray  # (V,) barycentric: one third of the fan area
    degenerate_faces: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


def measure(mesh: HalfedgeMesh, positions: np.ndarray) -> Measures:
    """Compute every primitive measure at ``positions``."""
    r = np.asarray(positions, dtype=np.float64)
    f = mesh.faces
    p0, p1, p2 = r[f[:, 0]], r[f[:, 1]], r[f[:, 2]]
    raw = np.cross(p1 - p0, p2 - p0)
    two_area = np.linalg.norm(raw, axis=1)
    face_area = 0.5 * two_area

    degenerate = np.flatnonzero(two_area <= 0.0)
    if len(degenerate):
        logger.warning("%d degenerate (zero-area) faces", len(degenerate))
    safe = np.where(two_area > 0.0, two_area, 1.0)
    face_normal = raw / safe[:, None]
    face_normal[degenerate] = 0.0

    # Corner angles at faces[f, c] between the rays to the other two corners.
    corner_angle = np.empty_like(face_area, shape=(len(f), 3))
    corner_cot = np.empty_like(corner_angle)
    corners = (p0, p1, p2)
    for c in range(3):
        u = corners[(c + 1) % 3] - corners[c]
        w = corners[(c + 2) % 3] - corners[c]
        cross = np.linalg.norm(np.cross(u, w), axis=1)
        dot = np.einsum("ij,ij->i", u, w)
        corner_angle[:, c] = np.arctan2(cross, dot)
        corner_cot[:, c] = np.where(cross > 0.0, dot / np.where(cross > 0.0, cross, 1.0), 0.0)

    edge_vertices = mesh.edges
    edge_vector = r[edge_vertices[:, 1]] - r[edge_vertices[:, 0]]
    edge_length = np.linalg.norm(edge_vector, axis=1)

    # Signed dihedral via atan2 so convex folds of an outward-oriented mesh
    # come out positive; boundary edges stay 0 by convention.
    eh = mesh.edge_halfedge
    f1 = mesh.face[eh]
    f2 = mesh.face[mesh.twin[eh]]
    interior = f2 != BOUNDARY
    dihedral = np.zeros(mesh.n_edges)
    n1 = face_normal[f1[interior]]
    n2 = face_normal[f2[interior]]
    e_hat = edge_vector[interior] / np.where(
        edge_length[interior] > 0.0, edge_length[interior], 1.0
    )[:, None]
    dihedral[interior] = np.arctan2(
        np.einsum("ij,ij->i", np.cross(n1, n2), e_hat), np.einsum("ij,ij->i", n1, n2)
    )

    dual = np.zeros(mesh.n_vertices)
    np.add.at(dual, f.reshape(-1), np.repeat(face_area / 3.0, 3))

    return Measures(
        positions=r,
        face_area=face_area,
        face_normal=face_normal,
        corner_angle=corner_angle,
        corner_cot=corner_cot,
        edge_length=edge_length,
        edge_vector=edge_vector,
        dihedral_angle=dihedral,
        vertex_dual_area=dual,
        degenerate_faces=degenerate,
    )


def primitive_measures(mesh: HalfedgeMesh, positions: np.ndarray) -> dict:
    """Named primitive measures: the dict view of `measure`."""
    m = measure(mesh, positions)
    return {
        "edge_length": m.edge_length,
        "corner_angle": m.corner_angle,
        "dihedral_angle": m.dihedral_angle,
        "face_area": m.face_area,
        "face_normal": m.face_normal,
        "vertex_dual_area": m.vertex_dual_area,
    }


def total_area(mesh: HalfedgeMesh, positions: np.ndarray, measures: Measures | None = None) -> float:
    m = measures if measures is not None else measure(mesh, positions)
    return float(np.sum(m.face_area))


def _loop_planarity_defect(points: np.ndarray) -> float:
    """Largest out-of-plane offset of ``points`` relative to their extent."""
    c = points.mean(axis=0)
    q = points - c
    scale = max(float(np.abs(q).max()), 1e-300)
    # Smallest principal direction of the point cloud is the plane normal.
    _, s, vt = np.linalg.svd(q, full_matrices=False)
    offsets = q @ vt[-1]
    return float(np.abs(offsets).max() / scale)


def closure_volume(mesh: HalfedgeMesh, positions: np.ndarray) -> float:
    """Signed volume of the centroid fans closing each boundary loop.

    Cap triangles follow the boundary-halfedge direction, which continues the
    surface orientation, so mesh + caps integrate like a closed surface.
    """
    total = 0.0
    for loop in mesh.boundary_loops:
        v = positions[mesh.origin[loop]]
        c = v.mean(axis=0)
        nxt = np.roll(v, -1, axis=0)
        total += np.einsum("ij,ij->", np.cross(v, nxt), np.broadcast_to(c, v.shape)) / 6.0
    return float(total)


def enclosed_volume(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    planarity_tol: float = 1e-8,
) -> float:
    """Signed volume: tetrahedra fan for closed meshes, plus planar caps.

    Open meshes require each boundary loop to be coplanar (within
    ``planarity_tol`` relative offset) so the cap is geometrically meaningful.
    """
    r = np.asarray(positions, dtype=np.float64)
    f = mesh.faces
    vol = float(np.einsum("ij,ij->", np.cross(r[f[:, 0]], r[f[:, 1]]), r[f[:, 2]]) / 6.0)
    if mesh.is_closed:
        return vol
    for idx, loop in enumerate(mesh.boundary_loops):
        pts = r[mesh.origin[loop]]
        defect = _loop_planarity_defect(pts)
        if defect > planarity_tol:
            raise NonPlanarBoundary(
                f"boundary loop {idx} deviates from a plane by {defect:.3e} (relative)"
            )
    return vol + closure_volume(mesh, r)


def vertex_normals_angle_weighted(
    mesh: HalfedgeMesh, positions: np.ndarray, measures: Measures | None = None
) -> np.ndarray:
    """Unit angle-weighted normals for all vertices (zero rows if degenerate)."""
    m = measures if measures is not None else measure(mesh, positions)
    acc = np.zeros((mesh.n_vertices, 3))
    w = m.corner_angle[:, :, None] * m.face_normal[:, None, :]
    np.add.at(acc, mesh.faces.reshape(-1), w.reshape(-1, 3))
    norms = np.linalg.norm(acc, axis=1)
    out = np.zeros_like(acc)
    ok = norms > 0.0
    out[ok] = acc[ok] / norms[ok, None]
    return out


def vertex_normal_angle_weighted(mesh: HalfedgeMesh, positions: np.ndarray, v: int) -> np.ndarray:
    """Unit angle-weighted normal at one vertex; raises `ZeroNormal` if degenerate."""
    n = vertex_normals_angle_weighted(mesh, positions)[v]
    if not np.any(n):
        raise ZeroNormal(f"vertex {v} has a degenerate fan")
    return n


def face_aspect_ratio(measures: Measures, mesh: HalfedgeMesh) -> np.ndarray:
    """Circumradius over twice the inradius, per face (1 for equilateral)."""
    el = measures.edge_length[mesh.edge[: 3 * mesh.n_faces]].reshape(-1, 3)
    prod = el.prod(axis=1)
    perim = el.sum(axis=1)
    area = measures.face_area
    safe = np.where(area > 0.0, area, 1.0)
    ratio = prod * perim / (16.0 * safe * safe)
    return np.where(area > 0.0, ratio, np.inf)


def mesh_statistics(mesh: HalfedgeMesh, positions: np.ndarray) -> dict:
    """Counts plus edge-length and face-quality summary, for reports."""
    m = measure(mesh, positions)
    ratio = face_aspect_ratio(m, mesh)
    finite = ratio[np.isfinite(ratio)]
    stats = {
        "n_vertices": mesh.n_vertices,
        "n_edges": mesh.n_edges,
        "n_faces": mesh.n_faces,
        "euler_characteristic": mesh.euler_characteristic,
        "boundary_loops": len(mesh.boundary_loops),
        "genus": mesh.genus,
        "total_area": float(np.sum(m.face_area)),
        "edge_length_mean": float(m.edge_length.mean()),
        "edge_length_min": float(m.edge_length.min()),
        "edge_length_max": float(m.edge_length.max()),
        "aspect_ratio_mean": float(finite.mean()) if len(finite) else float("inf"),
        "aspect_ratio_max": float(finite.max()) if len(finite) else float("inf"),
        "degenerate_faces": int(len(m.degenerate_faces)),
    }
    try:
        stats["enclosed_volume"] = enclosed_volume(mesh, positions)
    except NonPlanarBoundary:
        stats["enclosed_volume"] = None
    return stats
