"""Simulation state: vertex positions plus the protein area-fraction field."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .halfedge import HalfedgeMesh, MeshError


class OutOfRangePhi(MeshError):
    """Protein fraction outside [0, 1] where a strict contract requires it."""


@dataclass
class SystemState:
    """Positions (V, 3) in µm and protein fraction φ (V,) dimensionless.

    ``time`` counts solver-native time (physical time divided by the drag
    normalization); ``step`` counts accepted solver steps.
    """

    positions: np.ndarray
    phi: np.ndarray
    time: float = 0.0
    step: int = 0

    def __post_init__(self) -> None:
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise ValueError(f"positions must be (V, 3), got {self.positions.shape}")
        if self.phi.shape != (self.positions.shape[0],):
            raise ValueError(
                f"phi must be ({self.positions.shape[0]},), got {self.phi.shape}"
            )

    @property
    def n_vertices(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> "SystemState":
        return SystemState(
            self.positions.copy(), self.phi.copy(), time=self.time, step=self.step
        )

    def with_positions(self, positions: np.ndarray) -> "SystemState":
        return replace(self, positions=positions)

    def with_phi(self, phi: np.ndarray) -> "SystemState":
        return replace(self, phi=phi)


def make_state(
    mesh: HalfedgeMesh, positions: np.ndarray, phi: float | np.ndarray = 0.0
) -> SystemState:
    """Build a state for ``mesh``, broadcasting a scalar φ if given."""
    phi_arr = np.broadcast_to(np.asarray(phi, dtype=np.float64), (mesh.n_vertices,)).copy()
    return SystemState(np.asarray(positions, dtype=np.float64).copy(), phi_arr)


def check_phi_range(phi: np.ndarray, slack: float = 1e-12) -> None:
    """Raise OutOfRangePhi if φ leaves [0, 1] by more than ``slack``."""
    lo = float(np.min(phi))
    hi = float(np.max(phi))
    if lo < -slack or hi > 1.0 + slack:
        raise OutOfRangePhi(f"phi range [{lo:.3g}, {hi:.3g}] outside [0, 1]")
