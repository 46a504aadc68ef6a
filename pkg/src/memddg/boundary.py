"""Boundary-condition masks for forces and the protein field.

Constraints act by zeroing rows (or single components) of the integrated
force matrix, so constrained vertices simply never move; the protein field
can additionally be pinned to Dirichlet values on boundary loops.
"""
from __future__ import annotations

import numpy as np

from .halfedge import HalfedgeMesh, MeshError
from .parameters import BoundaryCondition


class UnassignedLoop(MeshError):
    """A mesh boundary loop has no boundary condition assigned."""


def resolve_loop_conditions(
    mesh: HalfedgeMesh, bcs: BoundaryCondition | list[BoundaryCondition] | None
) -> list[BoundaryCondition]:
    """Normalize ``bcs`` to one condition per boundary loop.

    A single condition is broadcast to every loop; ``None`` means free
    everywhere but is an error when the mesh actually has boundary loops and
    the caller passed an explicit (too short) list.
    """
    n_loops = len(mesh.boundary_loops)
    if bcs is None:
        return [BoundaryCondition("free")] * n_loops
    if isinstance(bcs, BoundaryCondition):
        return [bcs] * n_loops
    if len(bcs) != n_loops:
        raise UnassignedLoop(
            f"mesh has {n_loops} boundary loops but {len(bcs)} conditions given"
        )
    return list(bcs)


def boundary_rings(
    mesh: HalfedgeMesh, depth: int, seed_vertices: np.ndarray | None = None
) -> np.ndarray:
    """(V,) int ring index: 0 on the seed vertices (all boundary vertices by
    default), 1 on their neighbors, ... capped at ``depth``."""
    ring = np.full(mesh.n_vertices, depth, dtype=np.int64)
    if seed_vertices is None:
        frontier = np.flatnonzero(mesh.is_boundary_vertex)
    else:
        frontier = np.asarray(seed_vertices, dtype=np.int64)
    ring[frontier] = 0
    for level in range(1, depth):
        nxt = []
        for v in frontier:
            for w in mesh.vertex_neighbors(v):
                if ring[w] > level:
                    ring[w] = level
                    nxt.append(w)
        frontier = np.array(nxt, dtype=np.int64)
        if frontier.size == 0:
            break
    return ring


def build_masks(
    mesh: HalfedgeMesh, bcs: BoundaryCondition | list[BoundaryCondition] | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-vertex masks: (V, 3) force multiplier, (V,) φ-pinned flag,
    (V,) pinned φ values (0 where not pinned).

    ``fixed`` freezes the loop ring and the two rings inward; ``roller``
    zeroes only the given component on the loop itself.
    """
    force_mask = np.ones((mesh.n_vertices, 3))
    phi_pinned = np.zeros(mesh.n_vertices, dtype=bool)
    phi_value = np.zeros(mesh.n_vertices)
    conditions = resolve_loop_conditions(mesh, bcs)

    for bc, loop in zip(conditions, mesh.boundary_loops):
        verts = mesh.origin[loop]
        if bc.kind == "roller":
            force_mask[verts, bc.axis] = 0.0
        elif bc.kind == "pinned":
            force_mask[verts] = 0.0
        elif bc.kind == "fixed":
            ring = boundary_rings(mesh, depth=3, seed_vertices=verts)
            force_mask[ring < 3] = 0.0
        if bc.phi_value is not None:
            phi_pinned[verts] = True
            phi_value[verts] = bc.phi_value
    return force_mask, phi_pinned, phi_value


def apply_force_mask(forces: np.ndarray, force_mask: np.ndarray) -> np.ndarray:
    """Elementwise mask; masked entries come out exactly zero."""
    return forces * force_mask
