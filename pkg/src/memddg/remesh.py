"""Mesh mutation: edge flips, collapses, splits and tangential smoothing.

Operations work on a growable face table with alive-masks and are validated
locally (link condition, duplicate-face and multi-edge guards) so every
accepted mutation preserves manifoldness and orientation.  A mutation log
records each accepted operation by vertex ids; replaying the log against the
same starting mesh reproduces the final mesh exactly, including the
compaction order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .halfedge import HalfedgeMesh, MeshError
from .parameters import RemeshConfig
from .state import SystemState

__all__ = [
    "WouldBreakManifold",
    "MutationLog",
    "EditableMesh",
    "remesh_pass",
    "vertex_shift",
    "replay_mutations",
]


class WouldBreakManifold(MeshError):
    """The requested mutation would produce a non-manifold configuration."""


@dataclass
class MutationLog:
    """Append-only record of accepted mutations (JSON-serializable)."""

    ops: list = dataclass_field(default_factory=list)

    def append(self, op: str, **data) -> None:
        self.ops.append({"op": op, **data})

    def extend(self, other: "MutationLog") -> None:
        self.ops.extend(other.ops)

    def to_json(self) -> str:
        return json.dumps(self.ops)

    @classmethod
    def from_json(cls, text: str) -> "MutationLog":
        return cls(ops=json.loads(text))

    def __len__(self) -> int:
        return len(self.ops)


class EditableMesh:
    """Face-table mesh editor; finalize() rebuilds the halfedge structure.

    Vertex and face slots are never reused within a session; compaction at
    finalize relabels alive entries in ascending slot order, which keeps
    replays bit-identical.
    """

    def __init__(
        self,
        mesh: HalfedgeMesh,
        positions: np.ndarray,
        phi: np.ndarray | None = None,
        protected: np.ndarray | None = None,
    ):
        self.faces = [tuple(int(x) for x in f) for f in mesh.faces]
        self.face_alive = [True] * len(self.faces)
        self.pos = [np.array(p, dtype=np.float64) for p in positions]
        self.phi = [float(x) for x in (phi if phi is not None else np.zeros(len(positions)))]
        self.vert_alive = [True] * len(self.pos)
        if protected is None:
            self.protected = [False] * len(self.pos)
        else:
            self.protected = [bool(b) for b in protected]
        # incidence: vertex -> set of face slots (alive ones kept accurate)
        self.vfaces: list[set[int]] = [set() for _ in self.pos]
        for fi, f in enumerate(self.faces):
            for v in f:
                self.vfaces[v].add(fi)
        self._nv = mesh.n_vertices
        self._ne = mesh.n_edges
        self._nf = mesh.n_faces
        self.log = MutationLog()

    # ---------- queries ----------

    def edge_faces(self, u: int, v: int) -> list[int]:
        """Alive face slots containing the undirected edge (u, v)."""
        out = []
        for fi in self.vfaces[u]:
            if self.face_alive[fi] and v in self.faces[fi]:
                out.append(fi)
        return sorted(out)

    def neighbors(self, v: int) -> set[int]:
        out: set[int] = set()
        for fi in self.vfaces[v]:
            if self.face_alive[fi]:
                out.update(self.faces[fi])
        out.discard(v)
        return out

    def is_boundary_edge(self, u: int, v: int) -> bool:
        return len(self.edge_faces(u, v)) == 1

    def is_boundary_vertex(self, v: int) -> bool:
        # count each incident undirected edge's face multiplicity
        count: dict[int, int] = {}
        for fi in self.vfaces[v]:
            if not self.face_alive[fi]:
                continue
            for w in self.faces[fi]:
                if w != v:
                    count[w] = count.get(w, 0) + 1
        return any(c == 1 for c in count.values())

    def _face_exists(self, triple: tuple[int, int, int]) -> bool:
        key = frozenset(triple)
        for fi in self.vfaces[triple[0]]:
            if self.face_alive[fi] and frozenset(self.faces[fi]) == key:
                return True
        return False

    def _dihedral_apexes(self, u: int, v: int, fids: list[int]) -> list[int]:
        return [next(w for w in self.faces[fi] if w not in (u, v)) for fi in fids]

    def _edge_in_order(self, fi: int, u: int, v: int) -> bool:
        """True if halfedge u→v (that cyclic order) occurs in face fi."""
        f = self.faces[fi]
        for c in range(3):
            if f[c] == u and f[(c + 1) % 3] == v:
                return True
        return False

    # ---------- mutations ----------

    def _kill_face(self, fi: int) -> None:
        self.face_alive[fi] = False
        for v in self.faces[fi]:
            self.vfaces[v].discard(fi)

    def _add_face(self, triple: tuple[int, int, int]) -> int:
        fi = len(self.faces)
        self.faces.append(triple)
        self.face_alive.append(True)
        for v in triple:
            self.vfaces[v].add(fi)
        return fi

    def try_flip(self, u: int, v: int, log: bool = True) -> bool:
        """Replace diagonal (u,v) of its diamond with the opposite one."""
        fids = self.edge_faces(u, v)
        if len(fids) != 2:
            return False
        f1 = next((fi for fi in fids if self._edge_in_order(fi, u, v)), None)
        f2 = next((fi for fi in fids if self._edge_in_order(fi, v, u)), None)
        if f1 is None or f2 is None:
            return False
        k = next(w for w in self.faces[f1] if w not in (u, v))
        l = next(w for w in self.faces[f2] if w not in (u, v))
        if k == l or l in self.neighbors(k):
            return False  # new edge already exists (or degenerate diamond)
        # reject flips that would produce a zero-area sliver
        for tri in ((u, l, k), (v, k, l)):
            a, b, c = (self.pos[t] for t in tri)
            n = np.cross(b - a, c - a)
            if np.dot(n, n) <= 1e-28 * max(1.0, np.dot(b - a, b - a)) ** 2:
                return False
        self._kill_face(f1)
        self._kill_face(f2)
        self._add_face((u, l, k))
        self._add_face((v, k, l))
        if log:
            self.log.append("flip", u=u, v=v)
        return True

    def try_collapse(self, u: int, v: int, log: bool = True) -> bool:
        """Merge v into u at the edge midpoint (or at u if u is protected)."""
        if self.protected[v]:
            u, v = v, u  # prefer deleting the unprotected endpoint
        if self.protected[v]:
            return False
        fids = self.edge_faces(u, v)
        if not fids:
            return False
        apexes = set(self._dihedral_apexes(u, v, fids))
        common = self.neighbors(u) & self.neighbors(v)
        if common != apexes:
            return False  # link condition
        interior_edge = len(fids) == 2
        if interior_edge and self.is_boundary_vertex(u) and self.is_boundary_vertex(v):
            return False  # would pinch the boundary
        # survivor faces at v after relabeling v -> u
        survivors = []
        for fi in self.vfaces[v]:
            if not self.face_alive[fi] or fi in fids:
                continue
            tri = tuple(u if w == v else w for w in self.faces[fi])
            if len(set(tri)) != 3 or self._face_exists(tri):
                return False
            survivors.append((fi, tri))
        seen = set()
        for _, tri in survivors:
            key = frozenset(tri)
            if key in seen:
                return False
            seen.add(key)
        a_u, a_v = self._dual_area(u), self._dual_area(v)
        w_tot = a_u + a_v
        if w_tot <= 0.0:
            a_u = a_v = w_tot = 1.0
            w_tot = 2.0
        if not self.protected[u]:
            self.pos[u] = 0.5 * (self.pos[u] + self.pos[v])
        self.phi[u] = (a_u * self.phi[u] + a_v * self.phi[v]) / w_tot
        for fi in fids:
            self._kill_face(fi)
        for fi, tri in survivors:
            self._kill_face(fi)
            self._add_face(tri)
        self.vert_alive[v] = False
        self.vfaces[v].clear()
        self._nv -= 1
        self._ne -= 3 if interior_edge else 2
        self._nf -= 2 if interior_edge else 1
        if log:
            self.log.append("collapse", u=u, v=v)
        return True

    def _dual_area(self, v: int) -> float:
        total = 0.0
        for fi in self.vfaces[v]:
            if not self.face_alive[fi]:
                continue
            a, b, c = (self.pos[t] for t in self.faces[fi])
            total += 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))
        return total / 3.0

    def try_split(self, u: int, v: int, log: bool = True) -> bool:
        """Insert the midpoint of (u,v), subdividing each incident face."""
        fids = self.edge_faces(u, v)
        if not fids:
            return False
        w = len(self.pos)
        self.pos.append(0.5 * (self.pos[u] + self.pos[v]))
        self.phi.append(0.5 * (self.phi[u] + self.phi[v]))
        self.vert_alive.append(True)
        self.protected.append(False)
        self.vfaces.append(set())
        for fi in fids:
            k = next(x for x in self.faces[fi] if x not in (u, v))
            if self._edge_in_order(fi, u, v):
                tris = ((u, w, k), (w, v, k))
            else:
                tris = ((v, w, k), (w, u, k))
            self._kill_face(fi)
            for tri in tris:
                self._add_face(tri)
        self._nv += 1
        self._ne += 3 if len(fids) == 2 else 2
        self._nf += 2 if len(fids) == 2 else 1
        if log:
            self.log.append("split", u=u, v=v)
        return True

    def shift_vertices(self, log: bool = True) -> None:
        """Move every interior unprotected vertex to its fan barycenter."""
        new_pos = {}
        for vi in range(len(self.pos)):
            if not self.vert_alive[vi] or self.protected[vi]:
                continue
            if self.is_boundary_vertex(vi):
                continue
            nb = sorted(self.neighbors(vi))
            if not nb:
                continue
            new_pos[vi] = np.mean([self.pos[w] for w in nb], axis=0)
        for vi, p in new_pos.items():
            self.pos[vi] = p
        if log:
            self.log.append("shift")

    # ---------- output ----------

    def counts(self) -> tuple[int, int, int]:
        """(V, E, F) tracked incrementally; O(1)."""
        return self._nv, self._ne, self._nf

    def recount(self) -> tuple[int, int, int]:
        """(V, E, F) recomputed from scratch; cross-checks counts()."""
        nv = sum(self.vert_alive)
        nf = sum(self.face_alive)
        edges = set()
        for fi, f in enumerate(self.faces):
            if not self.face_alive[fi]:
                continue
            for c in range(3):
                a, b = f[c], f[(c + 1) % 3]
                edges.add((a, b) if a < b else (b, a))
        return nv, len(edges), nf

    def finalize(self) -> tuple[HalfedgeMesh, np.ndarray, np.ndarray, np.ndarray]:
        """Compact and rebuild: (mesh, positions, phi, old_vertex -> new id)."""
        old_ids = [i for i, a in enumerate(self.vert_alive) if a]
        remap = np.full(len(self.pos), -1, dtype=np.int64)
        remap[old_ids] = np.arange(len(old_ids))
        positions = np.array([self.pos[i] for i in old_ids])
        phi = np.array([self.phi[i] for i in old_ids])
        tris = np.array(
            [self.faces[fi] for fi in range(len(self.faces)) if self.face_alive[fi]],
            dtype=np.int64,
        )
        mesh = HalfedgeMesh.from_faces(len(old_ids), remap[tris])
        if (mesh.n_vertices, mesh.n_edges, mesh.n_faces) != self.counts():
            raise MeshError("tracked element counts diverged from the face table")
        return mesh, positions, phi, remap

    def edges(self) -> list[tuple[int, int]]:
        out = set()
        for fi, f in enumerate(self.faces):
            if not self.face_alive[fi]:
                continue
            for c in range(3):
                a, b = f[c], f[(c + 1) % 3]
                out.add((a, b) if a < b else (b, a))
        return sorted(out)

    def _corner_angle(self, apex: int, a: int, b: int) -> float:
        u = self.pos[a] - self.pos[apex]
        w = self.pos[b] - self.pos[apex]
        nu, nw = np.linalg.norm(u), np.linalg.norm(w)
        if nu <= 0.0 or nw <= 0.0:
            return 0.0
        return float(np.arccos(np.clip(np.dot(u, w) / (nu * nw), -1.0, 1.0)))

    def opposite_angle_sum(self, u: int, v: int) -> float:
        """Sum of the two angles facing edge (u,v); the Delaunay test value."""
        fids = self.edge_faces(u, v)
        if len(fids) != 2:
            return 0.0
        total = 0.0
        for fi in fids:
            k = next(w for w in self.faces[fi] if w not in (u, v))
            total += self._corner_angle(k, u, v)
        return total

    def face_aspect(self, fi: int) -> float:
        """Circumradius over twice the inradius; 1 for equilateral."""
        a_, b_, c_ = (self.pos[t] for t in self.faces[fi])
        la = float(np.linalg.norm(b_ - c_))
        lb = float(np.linalg.norm(c_ - a_))
        lc = float(np.linalg.norm(a_ - b_))
        area = 0.5 * float(np.linalg.norm(np.cross(b_ - a_, c_ - a_)))
        if area <= 0.0:
            return np.inf
        s = 0.5 * (la + lb + lc)
        return la * lb * lc * s / (8.0 * area * area)

    def edge_curvature_density(self, u: int, v: int) -> float:
        """|integrated mean curvature| per unit length: half the dihedral angle."""
        fids = self.edge_faces(u, v)
        if len(fids) != 2:
            return 0.0
        normals = []
        for fi in fids:
            a_, b_, c_ = (self.pos[t] for t in self.faces[fi])
            n = np.cross(b_ - a_, c_ - a_)
            nn = np.linalg.norm(n)
            if nn <= 0.0:
                return 0.0
            normals.append(n / nn)
        n1, n2 = normals
        ang = float(np.arctan2(np.linalg.norm(np.cross(n1, n2)), np.dot(n1, n2)))
        return 0.5 * ang


def remesh_pass(
    state: SystemState,
    mesh: HalfedgeMesh,
    config: RemeshConfig | None = None,
    protected: np.ndarray | None = None,
) -> tuple[HalfedgeMesh, SystemState, MutationLog]:
    """One improvement sweep: flips, collapses, splits, then smoothing.

    Returns the rebuilt mesh, the state carried onto it (positions and phi
    transferred through every mutation) and the log of accepted operations.
    """
    if config is None:
        config = RemeshConfig()
    em = EditableMesh(mesh, state.positions, state.phi, protected=protected)
    if config.enable_flip:
        for _ in range(5):
            flipped = 0
            for u, v in em.edges():
                if em.opposite_angle_sum(u, v) > np.pi + 1e-10:
                    if em.try_flip(u, v):
                        flipped += 1
            if flipped == 0:
                break
    if config.enable_collapse:
        for fi in range(len(em.faces)):
            if not em.face_alive[fi]:
                continue
            if em.face_aspect(fi) <= config.collapse_aspect:
                continue
            f = em.faces[fi]
            pairs = sorted(
                ((f[c], f[(c + 1) % 3]) for c in range(3)),
                key=lambda e: float(np.linalg.norm(em.pos[e[0]] - em.pos[e[1]])),
            )
            em.try_collapse(*pairs[0])
    if config.enable_split:
        lengths = [float(np.linalg.norm(em.pos[u] - em.pos[v])) for u, v in em.edges()]
        median = float(np.median(lengths)) if lengths else 0.0
        for u, v in em.edges():
            if em.protected[u] and em.protected[v]:
                continue
            length = float(np.linalg.norm(em.pos[u] - em.pos[v]))
            long_enough = length > median
            curved = em.edge_curvature_density(u, v) > config.split_curvature
            if (curved and long_enough) or length > config.max_edge_length:
                em.try_split(u, v)
    if config.enable_shift:
        em.shift_vertices()
    new_mesh, positions, phi, _ = em.finalize()
    new_mesh.validate()
    new_state = SystemState(positions=positions, phi=phi, time=state.time, step=state.step)
    return new_mesh, new_state, em.log


def vertex_shift(
    mesh: HalfedgeMesh, positions: np.ndarray, protected: np.ndarray | None = None
) -> np.ndarray:
    """Move interior vertices to the barycenter of their one-ring."""
    acc = np.zeros_like(positions)
    count = np.zeros(mesh.n_vertices)
    i, j = mesh.origin, mesh.halfedge_target
    np.add.at(acc, i, positions[j])
    np.add.at(count, i, 1.0)
    movable = (count > 0) & ~mesh.is_boundary_vertex
    if protected is not None:
        movable &= ~np.asarray(protected, dtype=bool)
    out = positions.copy()
    out[movable] = acc[movable] / count[movable, None]
    return out


def replay_mutations(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray | None,
    log: MutationLog,
    protected: np.ndarray | None = None,
) -> tuple[HalfedgeMesh, np.ndarray, np.ndarray]:
    """Re-apply a mutation log to the mesh it was recorded against.

    Raises MeshError if any logged operation no longer applies, which means
    the log and mesh are mismatched.
    """
    em = EditableMesh(mesh, positions, phi, protected=protected)
    for entry in log.ops:
        op = entry["op"]
        if op == "shift":
            em.shift_vertices(log=False)
            continue
        u, v = int(entry["u"]), int(entry["v"])
        if op == "flip":
            ok = em.try_flip(u, v, log=False)
        elif op == "collapse":
            ok = em.try_collapse(u, v, log=False)
        elif op == "split":
            ok = em.try_split(u, v, log=False)
        else:
            raise MeshError(f"unknown mutation op {op!r}")
        if not ok:
            raise MeshError(f"mutation replay diverged at op {entry!r}")
    new_mesh, new_pos, new_phi, _ = em.finalize()
    return new_mesh, new_pos, new_phi
