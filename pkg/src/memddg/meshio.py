"""Mesh file I/O: ASCII PLY and Wavefront OBJ, triangles only.

PLY may carry a per-vertex scalar ``phi`` property; OBJ cannot store one.
Positions are written with 17 significant digits, so a write→read round trip
reproduces float64 coordinates exactly.
"""
from __future__ import annotations

import os

import numpy as np

from .halfedge import HalfedgeMesh

__all__ = ["ParseError", "UnknownFormat", "read_mesh", "write_mesh"]


class ParseError(ValueError):
    """Malformed mesh file; message carries the file and line number."""

    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class UnknownFormat(ValueError):
    """File extension is neither .ply nor .obj."""


_PLY_SCALARS = {
    "char", "uchar", "int8", "uint8", "short", "ushort", "int16", "uint16",
    "int", "uint", "int32", "uint32", "float", "float32", "double", "float64",
}


def _detect(path: str, fmt: str | None) -> str:
    if fmt is not None:
        fmt = fmt.lower()
        if fmt not in ("ply", "obj"):
            raise UnknownFormat(f"unsupported format {fmt!r}")
        return fmt
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ply":
        return "ply"
    if ext == ".obj":
        return "obj"
    raise UnknownFormat(f"cannot infer mesh format from {path!r} (use .ply or .obj)")


def read_mesh(
    path: str, fmt: str | None = None
) -> tuple[HalfedgeMesh, np.ndarray, np.ndarray | None]:
    """Load a triangle mesh; returns (mesh, positions, φ or None).

    The connectivity is validated on construction, so non-manifold input
    raises the corresponding mesh error rather than returning silently.
    """
    if _detect(path, fmt) == "ply":
        return _read_ply(path)
    return _read_obj(path)


def write_mesh(
    path: str,
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray | None = None,
    fmt: str | None = None,
) -> None:
    positions = np.asarray(positions, dtype=np.float64)
    if positions.shape != (mesh.n_vertices, 3):
        raise ValueError(
            f"positions shape {positions.shape} does not match "
            f"{mesh.n_vertices} vertices"
        )
    if phi is not None:
        phi = np.asarray(phi, dtype=np.float64)
        if phi.shape != (mesh.n_vertices,):
            raise ValueError(f"phi shape {phi.shape} does not match vertex count")
    if _detect(path, fmt) == "ply":
        _write_ply(path, mesh, positions, phi)
    else:
        if phi is not None:
            raise ValueError("OBJ has no per-vertex scalar channel; write PLY to keep phi")
        _write_obj(path, mesh, positions)


# ---------------------------------------------------------------- PLY


def _read_ply(path: str) -> tuple[HalfedgeMesh, np.ndarray, np.ndarray | None]:
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()

    lineno = 0

    def next_line() -> str:
        nonlocal lineno
        while lineno < len(lines):
            lineno += 1
            stripped = lines[lineno - 1].strip()
            if stripped and not stripped.startswith("comment"):
                return stripped
        raise ParseError(path, lineno, "unexpected end of file")

    if next_line() != "ply":
        raise ParseError(path, lineno, "missing 'ply' magic")
    if next_line().split() != ["format", "ascii", "1.0"]:
        raise ParseError(path, lineno, "only 'format ascii 1.0' is supported")

    # Header: remember the property layout of each element so vertex rows
    # with extra properties (normals, colors) can still be parsed.
    elements: list[tuple[str, int, list[str]]] = []
    while True:
        tokens = next_line().split()
        if tokens[0] == "end_header":
            break
        if tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError(path, lineno, "element needs a name and a count")
            try:
                count = int(tokens[2])
            except ValueError:
                raise ParseError(path, lineno, f"bad element count {tokens[2]!r}")
            elements.append((tokens[1], count, []))
        elif tokens[0] == "property":
            if not elements:
                raise ParseError(path, lineno, "property before any element")
            if tokens[1] == "list":
                if len(tokens) != 5:
                    raise ParseError(path, lineno, "malformed list property")
                elements[-1][2].append("list:" + tokens[4])
            else:
                if len(tokens) != 3 or tokens[1] not in _PLY_SCALARS:
                    raise ParseError(path, lineno, f"malformed property {tokens[1:]}")
                elements[-1][2].append(tokens[2])
        else:
            raise ParseError(path, lineno, f"unexpected header line {tokens[0]!r}")

    positions = None
    phi = None
    faces: list[tuple[int, int, int]] = []
    for name, count, props in elements:
        if name == "vertex":
            for axis in ("x", "y", "z"):
                if axis not in props:
                    raise ParseError(path, lineno, f"vertex element lacks {axis!r}")
            ix, iy, iz = props.index("x"), props.index("y"), props.index("z")
            iphi = props.index("phi") if "phi" in props else None
            positions = np.empty((count, 3))
            if iphi is not None:
                phi = np.empty(count)
            for n in range(count):
                tokens = next_line().split()
                if len(tokens) != len(props):
                    raise ParseError(
                        path, lineno,
                        f"expected {len(props)} vertex values, got {len(tokens)}",
                    )
                try:
                    positions[n] = (float(tokens[ix]), float(tokens[iy]), float(tokens[iz]))
                    if iphi is not None:
                        phi[n] = float(tokens[iphi])
                except ValueError:
                    raise ParseError(path, lineno, "non-numeric vertex value")
        elif name == "face":
            for n in range(count):
                tokens = next_line().split()
                try:
                    k = int(tokens[0])
                    idx = [int(t) for t in tokens[1 : 1 + k]]
                except (ValueError, IndexError):
                    raise ParseError(path, lineno, "malformed face row")
                if k != 3 or len(tokens) != 1 + k:
                    raise ParseError(path, lineno, f"only triangles supported, got {k}-gon")
                faces.append(tuple(idx))
        else:
            # Skip unknown elements (edges, materials) row by row.
            for _ in range(count):
                next_line()

    if positions is None:
        raise ParseError(path, lineno, "no vertex element")
    mesh = HalfedgeMesh.from_faces(len(positions), np.asarray(faces, dtype=np.int64))
    return mesh, positions, phi


def _write_ply(
    path: str, mesh: HalfedgeMesh, positions: np.ndarray, phi: np.ndarray | None
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {mesh.n_vertices}\n")
        f.write("property double x\nproperty double y\nproperty double z\n")
        if phi is not None:
            f.write("property double phi\n")
        f.write(f"element face {mesh.n_faces}\n")
        f.write("property list uchar int vertex_indices\n")
        f.write("end_header\n")
        for i, (x, y, z) in enumerate(positions):
            row = f"{x:.17g} {y:.17g} {z:.17g}"
            if phi is not None:
                row += f" {phi[i]:.17g}"
            f.write(row + "\n")
        for i, j, k in mesh.faces:
            f.write(f"3 {i} {j} {k}\n")


# ---------------------------------------------------------------- OBJ


def _read_obj(path: str) -> tuple[HalfedgeMesh, np.ndarray, None]:
    verts: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if tokens[0] == "v":
                if len(tokens) < 4:
                    raise ParseError(path, lineno, "vertex needs 3 coordinates")
                try:
                    verts.append((float(tokens[1]), float(tokens[2]), float(tokens[3])))
                except ValueError:
                    raise ParseError(path, lineno, "non-numeric vertex coordinate")
            elif tokens[0] == "f":
                if len(tokens) != 4:
                    raise ParseError(
                        path, lineno,
                        f"only triangles supported, got {len(tokens) - 1} corners",
                    )
                idx = []
                for t in tokens[1:]:
                    head = t.split("/", 1)[0]
                    try:
                        v = int(head)
                    except ValueError:
                        raise ParseError(path, lineno, f"bad face index {t!r}")
                    if v < 1 or v > len(verts):
                        raise ParseError(path, lineno, f"face index {v} out of range")
                    idx.append(v - 1)
                faces.append(tuple(idx))
            # vt/vn/o/g/s/usemtl/mtllib lines carry no triangle data; skipped.
    mesh = HalfedgeMesh.from_faces(len(verts), np.asarray(faces, dtype=np.int64))
    return mesh, np.asarray(verts, dtype=np.float64), None


def _write_obj(path: str, mesh: HalfedgeMesh, positions: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for x, y, z in positions:
            f.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for i, j, k in mesh.faces:
            f.write(f"f {i + 1} {j + 1} {k + 1}\n")
