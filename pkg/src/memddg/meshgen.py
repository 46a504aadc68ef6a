"""Built-in mesh generators: icosphere, spheroid, tube, hexagonal patch."""
from __future__ import annotations

import numpy as np

from .geometry import enclosed_volume
from .halfedge import HalfedgeMesh


class InvalidParams(ValueError):
    """Generator parameters outside their valid range."""


_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
        [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
        [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
    ],
    dtype=np.float64,
)

_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def _subdivide(positions: np.ndarray, faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One midpoint (1-to-4) split of every face."""
    verts = [p for p in positions]
    midpoint: dict[tuple[int, int], int] = {}

    def mid(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        idx = midpoint.get(key)
        if idx is None:
            idx = len(verts)
            verts.append(0.5 * (verts[a] + verts[b]))
            midpoint[key] = idx
        return idx

    out = np.empty((4 * len(faces), 3), dtype=np.int64)
    for n, (i, j, k) in enumerate(faces):
        ij, jk, ki = mid(i, j), mid(j, k), mid(k, i)
        out[4 * n : 4 * n + 4] = [(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)]
    return np.asarray(verts), out


def icosphere(subdivisions: int, radius: float = 1.0) -> tuple[HalfedgeMesh, np.ndarray]:
    """Icosahedron subdivided ``subdivisions`` times and projected to a sphere."""
    if subdivisions < 0 or radius <= 0:
        raise InvalidParams("icosphere needs subdivisions >= 0 and radius > 0")
    pos, faces = _ICOSAHEDRON_VERTICES.copy(), _ICOSAHEDRON_FACES.copy()
    for _ in range(subdivisions):
        pos, faces = _subdivide(pos, faces)
    pos = radius * pos / np.linalg.norm(pos, axis=1, keepdims=True)
    return HalfedgeMesh.from_faces(len(pos), faces), pos


def spheroid(
    subdivisions: int, a: float = 1.0, c: float = 0.5
) -> tuple[HalfedgeMesh, np.ndarray]:
    """Icosphere vertices mapped radially onto x²/a² + y²/a² + z²/c² = 1."""
    if a <= 0 or c <= 0:
        raise InvalidParams("spheroid needs a > 0 and c > 0")
    mesh, pos = icosphere(subdivisions, 1.0)
    scale = np.sqrt((pos[:, 0] / a) ** 2 + (pos[:, 1] / a) ** 2 + (pos[:, 2] / c) ** 2)
    return mesh, pos / scale[:, None]


def tube(
    radius: float,
    length: float,
    target_edge_length: float = 0.3,
    n_circumference: int | None = None,
    n_axial: int | None = None,
) -> tuple[HalfedgeMesh, np.ndarray]:
    """Open cylinder along z from 0 to ``length``; two planar boundary loops.

    Alternate rings are staggered half a step so faces are near-equilateral.
    """
    if radius <= 0 or length <= 0 or target_edge_length <= 0:
        raise InvalidParams("tube needs positive radius, length, edge length")
    n = n_circumference or max(6, round(2.0 * np.pi * radius / target_edge_length))
    row = 2.0 * np.pi * radius / n * (np.sqrt(3.0) / 2.0)
    m = n_axial or max(1, round(length / row))
    if n < 3 or m < 1:
        raise InvalidParams("tube resolution too coarse")

    rows = np.arange(m + 1)
    cols = np.arange(n)
    theta = 2.0 * np.pi * (cols[None, :] + 0.5 * (rows[:, None] % 2)) / n
    pos = np.empty(((m + 1) * n, 3))
    pos[:, 0] = (radius * np.cos(theta)).reshape(-1)
    pos[:, 1] = (radius * np.sin(theta)).reshape(-1)
    pos[:, 2] = np.repeat(rows * (length / m), n)

    faces = []
    for r in range(m):
        base, above = r * n, (r + 1) * n
        for c in range(n):
            c1 = (c + 1) % n
            if r % 2 == 0:
                # row above is shifted +half step
                faces.append((base + c, base + c1, above + c))
                faces.append((base + c1, above + c1, above + c))
            else:
                faces.append((base + c, base + c1, above + c1))
                faces.append((base + c, above + c1, above + c))
    faces = np.asarray(faces, dtype=np.int64)
    mesh = HalfedgeMesh.from_faces(len(pos), faces)
    if enclosed_volume(mesh, pos) < 0:
        faces = faces[:, ::-1]
        mesh = HalfedgeMesh.from_faces(len(pos), faces)
    return mesh, pos


def hex_patch(radius: float, rings: int) -> tuple[HalfedgeMesh, np.ndarray]:
    """Flat hexagonal patch in the z=0 plane: a triangular lattice of
    ``rings`` concentric rings with corner distance ``radius``."""
    if radius <= 0 or rings < 1:
        raise InvalidParams("patch needs radius > 0 and rings >= 1")
    step = radius / rings
    verts = [np.zeros(3)]
    ring_start = [0, 1]
    for k in range(1, rings + 1):
        corners = np.array(
            [
                [k * step * np.cos(np.pi / 3 * c), k * step * np.sin(np.pi / 3 * c), 0.0]
                for c in range(6)
            ]
        )
        for c in range(6):
            a, b = corners[c], corners[(c + 1) % 6]
            for j in range(k):
                verts.append(a + (b - a) * (j / k))
        ring_start.append(len(verts))

    def ring_vertex(k: int, t: int) -> int:
        if k == 0:
            return 0
        return ring_start[k] + t % (6 * k)

    faces = []
    for k in range(rings):
        outer = k + 1
        for c in range(6):
            for j in range(outer):
                o0 = ring_vertex(outer, c * outer + j)
                o1 = ring_vertex(outer, c * outer + j + 1)
                faces.append((o0, o1, ring_vertex(k, c * k + j)))
            for j in range(k):
                faces.append(
                    (
                        ring_vertex(outer, c * outer + j + 1),
                        ring_vertex(k, c * k + j + 1),
                        ring_vertex(k, c * k + j),
                    )
                )
    pos = np.asarray(verts)
    faces = np.asarray(faces, dtype=np.int64)
    mesh = HalfedgeMesh.from_faces(len(pos), faces)
    return mesh, pos


def generate_mesh(kind: str, **params) -> tuple[HalfedgeMesh, np.ndarray]:
    """Dispatch on ``kind`` ∈ {icosphere, spheroid, tube, patch}."""
    generators = {
        "icosphere": icosphere,
        "spheroid": spheroid,
        "tube": tube,
        "patch": hex_patch,
    }
    gen = generators.get(kind)
    if gen is None:
        raise InvalidParams(f"unknown mesh kind {kind!r}; choose from {sorted(generators)}")
    try:
        return gen(**params)
    except TypeError as exc:
        raise InvalidParams(str(exc)) from None
