"""Index-based halfedge connectivity for manifold triangle meshes.

Halfedge ``3*f + c`` runs from corner ``c`` to corner ``c + 1`` of face ``f``;
every boundary edge gets one extra halfedge living in a boundary loop with
face id ``BOUNDARY``.  ``next`` walks face cycles and boundary loops alike,
``twin`` is a fixed-point-free involution, and ``origin`` maps each halfedge
to the vertex it leaves.  Connectivity is immutable; positions and fields are
carried separately so measure computations stay pure.
"""
from __future__ import annotations

import logging
from functools import cached_property

import numpy as np

logger = logging.getLogger(__name__)

BOUNDARY = -1


class MeshError(ValueError):
    """Base class for connectivity failures."""


class NonManifoldEdge(MeshError):
    """An undirected edge is shared by more than two faces."""


class NonManifoldVertex(MeshError):
    """A vertex whose incident faces do not form a single fan."""


class InconsistentOrientation(MeshError):
    """Two faces induce the same directed halfedge."""


class IsolatedVertex(MeshError):
    """A vertex referenced by no face."""


class HalfedgeMesh:
    """Immutable halfedge triangle mesh.

    Attributes
    ----------
    faces : (F, 3) int array of CCW vertex triples.
    next_halfedge, twin, origin, edge, face : flat halfedge maps; boundary
        halfedges carry ``face == BOUNDARY`` and come after the ``3*F``
        interior ones.
    boundary_loops : list of int arrays, each an ordered halfedge cycle.
    """

    def __init__(
        self,
        n_vertices: int,
        faces: np.ndarray,
        next_halfedge: np.ndarray,
        twin: np.ndarray,
        origin: np.ndarray,
        edge: np.ndarray,
        face: np.ndarray,
        boundary_loops: list[np.ndarray],
        vertex_halfedge: np.ndarray,
    ):
        self.n_vertices = int(n_vertices)
        self.faces = faces
        self.next_halfedge = next_halfedge
        self.twin = twin
        self.origin = origin
        self.edge = edge
        self.face = face
        self.boundary_loops = boundary_loops
        self.vertex_halfedge = vertex_halfedge
        for a in (faces, next_halfedge, twin, origin, edge, face, vertex_halfedge):
            a.setflags(write=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_faces(cls, n_vertices: int, faces) -> "HalfedgeMesh":
        """Build and validate connectivity from CCW vertex triples."""
        faces = np.ascontiguousarray(faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError(f"faces must be (F, 3), got {faces.shape}")
        if faces.size == 0:
            raise ValueError("mesh needs at least one face")
        if faces.min() < 0 or faces.max() >= n_vertices:
            raise ValueError("face references a vertex outside [0, n_vertices)")
        if np.any(
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 2] == faces[:, 0])
        ):
            bad = int(
                np.flatnonzero(
                    (faces[:, 0] == faces[:, 1])
                    | (faces[:, 1] == faces[:, 2])
                    | (faces[:, 2] == faces[:, 0])
                )[0]
            )
            raise ValueError(f"face {bad} repeats a vertex")

        n_faces = len(faces)
        n_interior = 3 * n_faces
        origin = faces.reshape(-1).copy()
        target = faces[:, [1, 2, 0]].reshape(-1).copy()
        nxt = (
            np.repeat(np.arange(n_faces, dtype=np.int64) * 3, 3)
            + np.tile(np.array([1, 2, 0], dtype=np.int64), n_faces)
        )
        face_of = np.repeat(np.arange(n_faces, dtype=np.int64), 3)

        used = np.zeros(n_vertices, dtype=bool)
        used[origin] = True
        if not used.all():
            raise IsolatedVertex(f"vertex {int(np.flatnonzero(~used)[0])} belongs to no face")

        lo = np.minimum(origin, target)
        hi = np.maximum(origin, target)
        undirected = lo * n_vertices + hi
        uniq, first, inverse, counts = np.unique(
            undirected, return_index=True, return_inverse=True, return_counts=True
        )
        if counts.max(initial=0) > 2:
            k = int(uniq[np.argmax(counts)])
            raise NonManifoldEdge(
                f"edge ({k // n_vertices}, {k % n_vertices}) is shared by {int(counts.max())} faces"
            )
        # Edge ids in order of first appearance so rebuilds are reproducible.
        rank = np.empty(len(uniq), dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
        edge_of = rank[inverse]
        n_edges_total = len(uniq)

        twin = np.full(n_interior, -1, dtype=np.int64)
        order = np.argsort(edge_of, kind="stable")
        sorted_edges = edge_of[order]
        mate = sorted_edges[1:] == sorted_edges[:-1]
        a = order[:-1][mate]
        b = order[1:][mate]
        same_direction = origin[a] == origin[b]
        if np.any(same_direction):
            h = int(a[np.flatnonzero(same_direction)[0]])
            raise InconsistentOrientation(
                f"directed edge ({int(origin[h])}, {int(target[h])}) appears twice; "
                "a face is wound backwards"
            )
        twin[a] = b
        twin[b] = a

        # One boundary halfedge per unmatched interior halfedge.
        rim = np.flatnonzero(twin == -1)
        n_boundary = len(rim)
        n_half = n_interior + n_boundary
        origin_all = np.concatenate([origin, target[rim]])
        twin_all = np.concatenate([twin, rim])
        twin_all[rim] = n_interior + np.arange(n_boundary)
        edge_all = np.concatenate([edge_of, edge_of[rim]])
        face_all = np.concatenate([face_of, np.full(n_boundary, BOUNDARY, dtype=np.int64)])
        next_all = np.concatenate([nxt, np.full(n_boundary, -1, dtype=np.int64)])

        # Link boundary loops: the successor of a boundary halfedge is the
        # unique boundary halfedge leaving its head.
        head = origin_all[twin_all[n_interior:]]
        out_of = {}
        for i, v in enumerate(origin_all[n_interior:]):
            h = n_interior + i
            if int(v) in out_of:
                raise NonManifoldVertex(
                    f"vertex {int(v)} touches the boundary along two separate wedges"
                )
            out_of[int(v)] = h
        loops: list[np.ndarray] = []
        claimed = np.zeros(n_boundary, dtype=bool)
        for i in range(n_boundary):
            if claimed[i]:
                continue
            h = n_interior + i
            cycle = []
            while True:
                cycle.append(h)
                claimed[h - n_interior] = True
                h = out_of[int(head[h - n_interior])]
                if h == cycle[0]:
                    break
            for k in range(len(cycle)):
                next_all[cycle[k]] = cycle[(k + 1) % len(cycle)]
            loops.append(np.asarray(cycle, dtype=np.int64))

        # Canonical outgoing halfedge per vertex; boundary vertices point at
        # their boundary halfedge so fan walks start at the open end.
        vertex_halfedge = np.full(n_vertices, -1, dtype=np.int64)
        vertex_halfedge[origin[::-1]] = np.arange(n_interior - 1, -1, -1, dtype=np.int64)
        for v, h in out_of.items():
            vertex_halfedge[v] = h

        mesh = cls(
            n_vertices,
            faces,
            next_all,
            twin_all,
            origin_all,
            edge_all,
            face_all,
            loops,
            vertex_halfedge,
        )
        mesh._check_fans()
        return mesh

    def _check_fans(self):
        """Each vertex's outgoing halfedges must form one ``next∘twin`` orbit."""
        degree = np.bincount(self.origin, minlength=self.n_vertices)
        nxt, twin = self.next_halfedge, self.twin
        for v in range(self.n_vertices):
            h0 = self.vertex_halfedge[v]
            h = h0
            seen = 0
            while True:
                seen += 1
                h = nxt[twin[h]]
                if h == h0:
                    break
                if seen > degree[v]:
                    break
            if seen != degree[v]:
                raise NonManifoldVertex(
                    f"vertex {v} has {int(degree[v])} outgoing halfedges but its fan "
                    f"closes after {seen}"
                )

    # -- sizes ------------------------------------------------------------

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return int(self.edge.max()) + 1

    @property
    def n_halfedges(self) -> int:
        return len(self.origin)

    @property
    def n_interior_halfedges(self) -> int:
        return 3 * self.n_faces

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def is_closed(self) -> bool:
        return not self.boundary_loops

    @property
    def genus(self) -> int:
        return (2 - len(self.boundary_loops) - self.euler_characteristic) // 2

    # -- derived index arrays (connectivity only, cached) ------------------

    @cached_property
    def halfedge_target(self) -> np.ndarray:
        t = self.origin[self.twin]
        t.setflags(write=False)
        return t

    @cached_property
    def apex(self) -> np.ndarray:
        """Third vertex of the face left of each halfedge; -1 on boundary."""
        ap = np.full(self.n_halfedges, -1, dtype=np.int64)
        ni = self.n_interior_halfedges
        interior = np.arange(ni)
        ap[:ni] = self.origin[self.next_halfedge[self.next_halfedge[interior]]]
        ap.setflags(write=False)
        return ap

    @cached_property
    def edge_halfedge(self) -> np.ndarray:
        """Canonical (lowest-id, hence interior) halfedge per edge."""
        eh = np.full(self.n_edges, self.n_halfedges, dtype=np.int64)
        np.minimum.at(eh, self.edge, np.arange(self.n_halfedges))
        eh.setflags(write=False)
        return eh

    @cached_property
    def edges(self) -> np.ndarray:
        """(E, 2) endpoints in the canonical halfedge's direction."""
        eh = self.edge_halfedge
        e = np.stack([self.origin[eh], self.halfedge_target[eh]], axis=1)
        e.setflags(write=False)
        return e

    @cached_property
    def edge_is_boundary(self) -> np.ndarray:
        b = self.face[self.twin[self.edge_halfedge]] == BOUNDARY
        b.setflags(write=False)
        return b

    @cached_property
    def is_boundary_vertex(self) -> np.ndarray:
        b = np.zeros(self.n_vertices, dtype=bool)
        for loop in self.boundary_loops:
            b[self.origin[loop]] = True
        b.setflags(write=False)
        return b

    @cached_property
    def vertex_degree(self) -> np.ndarray:
        d = np.bincount(self.origin, minlength=self.n_vertices)
        d.setflags(write=False)
        return d

    # -- traversal --------------------------------------------------------

    def outgoing_halfedges(self, v: int) -> list[int]:
        """All halfedges leaving ``v``, in fan order."""
        h0 = int(self.vertex_halfedge[v])
        out = [h0]
        h = int(self.next_halfedge[self.twin[h0]])
        while h != h0:
            out.append(h)
            h = int(self.next_halfedge[self.twin[h]])
        return out

    def vertex_neighbors(self, v: int) -> list[int]:
        return [int(self.halfedge_target[h]) for h in self.outgoing_halfedges(v)]

    def fan_faces(self, v: int) -> list[int]:
        return [
            int(self.face[h]) for h in self.outgoing_halfedges(v) if self.face[h] != BOUNDARY
        ]

    def boundary_vertex_loops(self) -> list[np.ndarray]:
        """Vertex cycles of each boundary loop, in loop order."""
        return [self.origin[loop] for loop in self.boundary_loops]

    # -- validation -------------------------------------------------------

    def validate(self) -> dict:
        """Re-check the structural invariants; raises on violation."""
        nxt, twin, org = self.next_halfedge, self.twin, self.origin
        ni = self.n_interior_halfedges
        interior = np.arange(ni)
        if not np.array_equal(nxt[nxt[nxt[interior]]], interior):
            raise MeshError("next^3 != identity on interior halfedges")
        h = np.arange(self.n_halfedges)
        if not np.array_equal(twin[twin[h]], h) or np.any(twin == h):
            raise MeshError("twin is not a fixed-point-free involution")
        per_edge = np.bincount(self.edge, minlength=self.n_edges)
        if not np.all(per_edge == 2):
            raise NonManifoldEdge("an edge does not have exactly 2 halfedges")
        if np.any(org[twin] == org):
            raise MeshError("a halfedge and its twin share an origin")
        self._check_fans()
        chi = self.euler_characteristic
        n_loops = len(self.boundary_loops)
        if (2 - n_loops - chi) % 2 != 0 or self.genus < 0:
            raise MeshError(
                f"Euler characteristic {chi} inconsistent with {n_loops} boundary loops"
            )
        return {
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "n_faces": self.n_faces,
            "euler_characteristic": chi,
            "boundary_loops": n_loops,
            "genus": self.genus,
        }


def build_from_faces(positions, triangles) -> tuple[HalfedgeMesh, np.ndarray]:
    """Validate positions, build connectivity; returns ``(mesh, positions)``."""
    r = np.ascontiguousarray(positions, dtype=np.float64)
    if r.ndim != 2 or r.shape[1] != 3:
        raise ValueError(f"positions must be (V, 3), got {r.shape}")
    if not np.isfinite(r).all():
        raise ValueError("positions contain non-finite entries")
    mesh = HalfedgeMesh.from_faces(len(r), triangles)
    return mesh, r
