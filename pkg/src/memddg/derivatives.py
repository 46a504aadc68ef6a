"""Exact gradients of the primitive measures with respect to vertex positions.

Every function returns the analytic derivative of a measure (edge length,
corner angle, face area, dihedral angle, dual area, enclosed volume) so that
force assembly is an exact chain rule, never an approximation.  Layouts put
one slot per (cell, influencing-vertex) pair; slots whose vertex does not
exist (boundary) are zero-filled.
"""
from __future__ import annotations

import numpy as np

from .geometry import Measures
from .halfedge import BOUNDARY, HalfedgeMesh


def face_area_gradients(mesh: HalfedgeMesh, m: Measures) -> np.ndarray:
    """(F, 3, 3): ``grad[f, c]`` = ∇A_f w.r.t. corner ``c`` of face ``f``.

    The gradient is half the opposite edge rotated 90° counterclockwise in
    the face plane (so it points away from the opposite edge).
    """
    r = m.positions
    f = mesh.faces
    grad = np.empty((len(f), 3, 3))
    for c in range(3):
        e_opp = r[f[:, (c + 2) % 3]] - r[f[:, (c + 1) % 3]]
        grad[:, c, :] = 0.5 * np.cross(m.face_normal, e_opp)
    return grad


def corner_angle_gradients(mesh: HalfedgeMesh, m: Measures) -> np.ndarray:
    """(F, 3, 3, 3): ``grad[f, c, d]`` = ∇∠(corner ``c``) w.r.t. corner ``d``.

    Moving an endpoint perpendicular to its ray rotates that ray at rate
    1/length; the apex entry follows from translation invariance.
    """
    r = m.positions
    f = mesh.faces
    n = m.face_normal
    grad = np.zeros((len(f), 3, 3, 3))
    for c in range(3):
        b, cc = (c + 1) % 3, (c + 2) % 3
        u = r[f[:, b]] - r[f[:, c]]
        w = r[f[:, cc]] - r[f[:, c]]
        lu = np.einsum("ij,ij->i", u, u)
        lw = np.einsum("ij,ij->i", w, w)
        g_b = -np.cross(n, u) / np.where(lu > 0.0, lu, 1.0)[:, None]
        g_c = np.cross(n, w) / np.where(lw > 0.0, lw, 1.0)[:, None]
        grad[:, c, b] = g_b
        grad[:, c, cc] = g_c
        grad[:, c, c] = -(g_b + g_c)
    return grad


def edge_length_gradients(mesh: HalfedgeMesh, m: Measures) -> np.ndarray:
    """(E, 2, 3): ∇l w.r.t. the canonical tail and head of each edge."""
    l = np.where(m.edge_length > 0.0, m.edge_length, 1.0)
    unit = m.edge_vector / l[:, None]
    return np.stack([-unit, unit], axis=1)


def dihedral_angle_gradients(mesh: HalfedgeMesh, m: Measures) -> np.ndarray:
    """(E, 4, 3): ∇φ w.r.t. the diamond (tail u, head v, apex k, apex l).

    ``k`` is the apex of the canonical halfedge's face, ``l`` the twin face's;
    boundary edges return all-zero rows (their dihedral is pinned at 0).
    Endpoint rows carry the opposite endpoint's corner cotangents; apex rows
    are −l/(2A) times the face normal.
    """
    eh = mesh.edge_halfedge
    t = mesh.twin[eh]
    f1 = mesh.face[eh]
    f2 = mesh.face[t]
    interior = (f1 != BOUNDARY) & (f2 != BOUNDARY)
    grad = np.zeros((mesh.n_edges, 4, 3))
    if not interior.any():
        return grad

    e = np.flatnonzero(interior)
    h = eh[e]
    th = t[e]
    fa, fb = f1[e], f2[e]
    n1 = m.face_normal[fa]
    n2 = m.face_normal[fb]
    l = m.edge_length[e]
    inv_l = 1.0 / np.where(l > 0.0, l, 1.0)

    # corner index of the head vertex v: successor of h in f1, origin of twin in f2
    cot_v1 = m.corner_cot[fa, (h + 1) % 3]
    cot_v2 = m.corner_cot[fb, th % 3]
    # corner index of the tail vertex u symmetrically
    cot_u1 = m.corner_cot[fa, h % 3]
    cot_u2 = m.corner_cot[fb, (th + 1) % 3]

    grad[e, 0] = (cot_v1[:, None] * n1 + cot_v2[:, None] * n2) * inv_l[:, None]
    grad[e, 1] = (cot_u1[:, None] * n1 + cot_u2[:, None] * n2) * inv_l[:, None]
    a1 = m.face_area[fa]
    a2 = m.face_area[fb]
    grad[e, 2] = -(l / (2.0 * np.where(a1 > 0.0, a1, 1.0)))[:, None] * n1
    grad[e, 3] = -(l / (2.0 * np.where(a2 > 0.0, a2, 1.0)))[:, None] * n2
    return grad


def edge_diamond(mesh: HalfedgeMesh) -> np.ndarray:
    """(E, 4) vertex ids (u, v, k, l) matching `dihedral_angle_gradients`;
    missing apexes are -1."""
    eh = mesh.edge_halfedge
    t = mesh.twin[eh]
    return np.stack(
        [mesh.origin[eh], mesh.halfedge_target[eh], mesh.apex[eh], mesh.apex[t]], axis=1
    )


def dual_area_gradients(mesh: HalfedgeMesh, m: Measures) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal (V, 3) ∇_{r_i}A_i and per-halfedge (H, 3) ∇_{r_origin}A_target.

    Each is one third of the summed gradients of the shared faces' areas.
    """
    fag = face_area_gradients(mesh, m)
    diag = np.zeros((mesh.n_vertices, 3))
    np.add.at(diag, mesh.faces.reshape(-1), fag.reshape(-1, 3) / 3.0)

    off = np.zeros((mesh.n_halfedges, 3))
    ni = mesh.n_interior_halfedges
    h = np.arange(mesh.n_halfedges)
    t = mesh.twin[h]
    own = h < ni
    off[own] += fag[mesh.face[h[own]], h[own] % 3] / 3.0
    tw = t < ni
    # origin(h) sits at the corner after twin's origin in the twin face
    off[tw] += fag[mesh.face[t[tw]], (t[tw] + 1) % 3] / 3.0
    return diag, off


def volume_gradient(mesh: HalfedgeMesh, positions: np.ndarray) -> np.ndarray:
    """(V, 3) gradient of the signed tetrahedra-fan volume (mesh faces only).

    For closed meshes this equals the integrated vertex normal
    ∫n⃗_i = (1/3)·Σ_fan A_f n̂_f.
    """
    r = np.asarray(positions, dtype=np.float64)
    f = mesh.faces
    grad = np.zeros((mesh.n_vertices, 3))
    for c in range(3):
        np.add.at(grad, f[:, c], np.cross(r[f[:, (c + 1) % 3]], r[f[:, (c + 2) % 3]]) / 6.0)
    return grad


def integrated_vertex_normals(mesh: HalfedgeMesh, m: Measures) -> np.ndarray:
    """(V, 3) ∫n⃗_i = one third of the area-weighted fan normal sum."""
    acc = np.zeros((mesh.n_vertices, 3))
    w = (m.face_area[:, None] * m.face_normal) / 3.0
    for c in range(3):
        np.add.at(acc, mesh.faces[:, c], w)
    return acc


def closure_volume_gradient(mesh: HalfedgeMesh, positions: np.ndarray) -> np.ndarray:
    """(V, 3) gradient of the planar-cap closure volume over boundary vertices.

    Caps are centroid fans; the centroid's dependence on every loop vertex is
    chained through explicitly so open-mesh volume forces stay exact.
    """
    r = np.asarray(positions, dtype=np.float64)
    grad = np.zeros((mesh.n_vertices, 3))
    for loop in mesh.boundary_loops:
        vid = mesh.origin[loop]
        v = r[vid]
        c = v.mean(axis=0)
        nxt = np.roll(v, -1, axis=0)
        prv = np.roll(v, 1, axis=0)
        # d/dv of Σ c·(v_t × v_{t+1}): direct terms rotate the neighbors
        # around c, the centroid term spreads the loop's cap normal evenly.
        direct = np.cross(nxt - prv, np.broadcast_to(c, v.shape))
        loop_normal = np.cross(v, nxt).sum(axis=0)
        np.add.at(grad, vid, (direct + loop_normal / len(vid)) / 6.0)
    return grad
