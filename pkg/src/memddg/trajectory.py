"""Trajectory files: a text format for (t, topology, positions, φ) frames.

Frames carry their own face list; when the topology did not change since the
previously written frame, a back-reference row is written instead, so the
file stays self-contained while mutations remain representable.  A ``.gz``
suffix switches on gzip transparently.  Values are printed with 17
significant digits, so reading a file back reproduces float64 exactly.
"""
from __future__ import annotations

import gzip
import os
from dataclasses import dataclass, field

import numpy as np

from .halfedge import HalfedgeMesh

__all__ = [
    "TrajectoryError",
    "Frame",
    "Trajectory",
    "TrajectoryWriter",
    "read_trajectory",
]

_MAGIC = "memddg-trajectory 1"


class TrajectoryError(ValueError):
    """Malformed trajectory file or out-of-order append."""


@dataclass
class Frame:
    t: float
    faces: np.ndarray  # (F, 3) int
    positions: np.ndarray  # (V, 3)
    phi: np.ndarray | None
    scalars: dict


@dataclass
class Trajectory:
    units: str
    config_echo: str
    mutation_log_ref: str | None
    frames: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def mesh_at(self, k: int) -> HalfedgeMesh:
        frame = self.frames[k]
        return HalfedgeMesh.from_faces(len(frame.positions), frame.faces)


def _open(path, mode: str):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


class TrajectoryWriter:
    """Appends frames to a trajectory file; use as a context manager.

    ``config_echo`` (typically :func:`memddg.config.dumps_config` output) is
    embedded in the header so a trajectory documents the run that made it.
    """

    def __init__(
        self,
        path: str,
        config_echo: str = "",
        units: str = "um nN s",
        mutation_log_ref: str | None = None,
    ):
        self._f = _open(path, "w")
        self._last_faces: np.ndarray | None = None
        self._last_topo_frame = -1
        self._count = 0
        self._last_t = -np.inf
        echo_lines = config_echo.splitlines()
        self._f.write(_MAGIC + "\n")
        self._f.write(f"units {units}\n")
        self._f.write(f"config-lines {len(echo_lines)}\n")
        for line in echo_lines:
            self._f.write(line + "\n")
        self._f.write(f"mutation-log {mutation_log_ref or 'none'}\n")

    def append(
        self,
        t: float,
        faces: np.ndarray,
        positions: np.ndarray,
        phi: np.ndarray | None = None,
        scalars: dict | None = None,
    ) -> None:
        if t < self._last_t:
            raise TrajectoryError(f"frames must be ordered by t ({t} < {self._last_t})")
        faces = np.asarray(faces, dtype=np.int64)
        positions = np.asarray(positions, dtype=np.float64)
        f = self._f
        f.write(f"frame {self._count} t {t!r}\n")
        if self._last_faces is not None and np.array_equal(faces, self._last_faces):
            f.write(f"topology ref {self._last_topo_frame}\n")
        else:
            f.write(f"topology faces {len(faces)}\n")
            for i, j, k in faces:
                f.write(f"{i} {j} {k}\n")
            self._last_faces = faces
            self._last_topo_frame = self._count
        f.write(f"positions {len(positions)}\n")
        for x, y, z in positions:
            f.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        if phi is None:
            f.write("phi none\n")
        else:
            f.write(f"phi {len(phi)}\n")
            for v in phi:
                f.write(f"{v:.17g}\n")
        scalars = scalars or {}
        row = " ".join(f"{k}={v!r}" for k, v in scalars.items())
        f.write(f"scalars {len(scalars)} {row}".rstrip() + "\n")
        f.write("end\n")
        self._count += 1
        self._last_t = t

    def close(self) -> None:
        self._f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_trajectory(path: str) -> Trajectory:
    """Load every frame, resolving topology back-references."""
    with _open(path, "r") as f:
        lines = f.read().splitlines()
    it = iter(enumerate(lines, start=1))

    def need(prefix: str) -> tuple[int, str]:
        try:
            lineno, line = next(it)
        except StopIteration:
            raise TrajectoryError(f"{path}: truncated file, expected {prefix!r}")
        if not line.startswith(prefix):
            raise TrajectoryError(f"{path}:{lineno}: expected {prefix!r}, got {line!r}")
        return lineno, line

    _, magic = need(_MAGIC)
    _, units_line = need("units ")
    _, count_line = need("config-lines ")
    n_echo = int(count_line.split()[1])
    echo = []
    for _ in range(n_echo):
        try:
            _, line = next(it)
        except StopIteration:
            raise TrajectoryError(f"{path}: truncated config echo")
        echo.append(line)
    _, mut_line = need("mutation-log ")
    mut_ref = mut_line.split(None, 1)[1]
    traj = Trajectory(
        units=units_line[len("units "):],
        config_echo="\n".join(echo) + ("\n" if echo else ""),
        mutation_log_ref=None if mut_ref == "none" else mut_ref,
    )

    while True:
        try:
            lineno, line = next(it)
        except StopIteration:
            break
        if not line.strip():
            continue
        if not line.startswith("frame "):
            raise TrajectoryError(f"{path}:{lineno}: expected frame header, got {line!r}")
        tokens = line.split()
        t = float(tokens[3])
        lineno, topo = need("topology ")
        tokens = topo.split()
        if tokens[1] == "ref":
            ref = int(tokens[2])
            if not 0 <= ref < len(traj.frames):
                raise TrajectoryError(f"{path}:{lineno}: dangling topology ref {ref}")
            faces = traj.frames[ref].faces
        else:
            n_faces = int(tokens[2])
            faces = np.empty((n_faces, 3), dtype=np.int64)
            for n in range(n_faces):
                lineno, row = next(it)
                faces[n] = [int(v) for v in row.split()]
        _, pos_line = need("positions ")
        n_verts = int(pos_line.split()[1])
        positions = np.empty((n_verts, 3))
        for n in range(n_verts):
            lineno, row = next(it)
            positions[n] = [float(v) for v in row.split()]
        _, phi_line = need("phi ")
        token = phi_line.split()[1]
        if token == "none":
            phi = None
        else:
            phi = np.empty(int(token))
            for n in range(len(phi)):
                lineno, row = next(it)
                phi[n] = float(row)
        _, scal_line = need("scalars ")
        tokens = scal_line.split()
        scalars = {}
        for item in tokens[2 : 2 + int(tokens[1])]:
            key, _, value = item.partition("=")
            scalars[key] = float(value)
        need("end")
        traj.frames.append(Frame(t, faces, positions, phi, scalars))
    return traj
