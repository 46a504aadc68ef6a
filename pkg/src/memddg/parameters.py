"""Typed parameter sets for the membrane model, solvers and remeshing.

Units are fixed project-wide: lengths in µm, forces in nN, time in s, so
energies come out in µm·nN.  Field names double as configuration-file keys.
"""
from __future__ import annotations

from dataclasses import dataclass, fields


class ParameterError(ValueError):
    """A parameter value violates its documented invariant."""


@dataclass
class MembraneParameters:
    """Constitutive constants of the membrane model.

    kappa_b : bending rigidity of the bare membrane (µm·nN)
    kappa_c : rigidity increment carried by bound protein (µm·nN)
    hbar_0  : background spontaneous curvature (1/µm)
    hbar_c  : spontaneous curvature carried by bound protein (1/µm)
    K_A     : area stretching modulus (nN/µm); with A_bar the preferred area
    lambda_fixed : prescribed surface tension (nN/µm); overrides the elastic law
    K_V     : osmotic strength, the product (van't Hoff factor)·R·T·n (µm·nN)
    c_bar_over_n : ambient concentration divided by enclosed solute (1/µm³);
        only this ratio enters the pressure law, so the two are stored as one
    V_bar   : preferred volume (µm³) for the phenomenological pressure law
    use_phenomenological_pressure : select the quadratic volume penalty
        instead of the exact mixing law
    epsilon : adsorption energy per covered area (µm·nN, typically negative)
    eta     : composition-gradient (Dirichlet) constant (µm·nN)
    xi      : drag coefficient (nN·s/µm)
    B       : protein mobility (1/(nN·µm·s))
    """

    kappa_b: float = 8.22e-5
    kappa_c: float = 0.0
    hbar_0: float = 0.0
    hbar_c: float = 0.0
    K_A: float = 0.0
    A_bar: float | None = None
    lambda_fixed: float | None = None
    K_V: float = 0.0
    c_bar_over_n: float = 0.0
    V_bar: float | None = None
    use_phenomenological_pressure: bool = False
    epsilon: float = 0.0
    eta: float = 0.0
    xi: float = 1.0
    B: float = 0.0

    def __post_init__(self) -> None:
        if not self.kappa_b > 0.0:
            raise ParameterError(f"kappa_b must be positive, got {self.kappa_b}")
        if self.K_A < 0.0:
            raise ParameterError(f"K_A must be nonnegative, got {self.K_A}")
        if self.eta < 0.0:
            raise ParameterError(f"eta must be nonnegative, got {self.eta}")
        if not self.xi > 0.0:
            raise ParameterError(f"xi must be positive, got {self.xi}")
        if self.B < 0.0:
            raise ParameterError(f"B must be nonnegative, got {self.B}")
        if self.use_phenomenological_pressure and self.K_V != 0.0 and self.V_bar is None:
            raise ParameterError("phenomenological pressure law requires V_bar")

    @property
    def pressure_active(self) -> bool:
        return self.K_V != 0.0


@dataclass
class ReservoirSpec:
    """Implicit membrane reservoir joined to an open patch.

    When enabled, the reservoir area/volume are added to the patch totals so
    state-dependent tension and pressure see the whole system.
    """

    A_r: float = 0.0
    V_r: float = 0.0
    enabled: bool = False

    def __post_init__(self) -> None:
        if self.A_r < 0.0 or self.V_r < 0.0:
            raise ParameterError("reservoir area/volume must be nonnegative")


@dataclass
class SolverConfig:
    """Integration / minimization knobs shared by all solvers.

    ``tolerance`` bounds the L2 norm of the masked net force (nN) at
    convergence; dt grows by ``dt_growth`` after every un-backtracked step.
    ``remesh_period`` of 0 disables remeshing; ``output_period`` controls
    trajectory frame spacing.
    """

    dt_init: float = 1e-4
    tolerance: float = 1e-6
    max_steps: int = 10_000
    sufficient_decrease: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 64
    dt_growth: float = 1.2
    cg_restart_period: int = 30
    barrier_strength: float = 1e-7
    remesh_period: int = 0
    output_period: int = 10

    def __post_init__(self) -> None:
        if not 0.0 < self.shrink < 1.0:
            raise ParameterError(f"shrink must be in (0,1), got {self.shrink}")
        if not 0.0 < self.sufficient_decrease < 0.5:
            raise ParameterError(
                f"sufficient_decrease must be in (0,0.5), got {self.sufficient_decrease}"
            )
        if not self.tolerance > 0.0:
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")
        if not self.dt_init > 0.0:
            raise ParameterError(f"dt_init must be positive, got {self.dt_init}")


@dataclass
class RemeshConfig:
    """Mutation pass configuration.

    Edges split when their fold curvature density |∫H_e|/l_e exceeds
    ``split_curvature`` and their length is above the current median (or when
    longer than ``max_edge_length``); faces collapse their shortest edge when
    the aspect ratio circumradius/(2·inradius) exceeds ``collapse_aspect``.
    """

    enable_flip: bool = True
    enable_collapse: bool = True
    enable_split: bool = True
    enable_shift: bool = True
    collapse_aspect: float = 4.0
    split_curvature: float = 1.0
    max_edge_length: float = float("inf")

    def __post_init__(self) -> None:
        if self.collapse_aspect <= 0.0 or self.split_curvature <= 0.0:
            raise ParameterError("remesh thresholds must be positive")


@dataclass
class RegularizationWeights:
    """Gains of the three shape-quality penalty forces (edge, face, conformal)."""

    K_e: float = 0.0
    K_f: float = 0.0
    K_c: float = 0.0

    def __post_init__(self) -> None:
        if min(self.K_e, self.K_f, self.K_c) < 0.0:
            raise ParameterError("regularization gains must be nonnegative")

    @property
    def any_active(self) -> bool:
        return max(self.K_e, self.K_f, self.K_c) > 0.0


@dataclass
class BoundaryCondition:
    """Constraint applied to one boundary loop.

    kind:
      * ``free``   — no masking,
      * ``roller`` — zero the force component along ``axis`` on the loop,
      * ``pinned`` — zero all components on the loop,
      * ``fixed``  — zero all components on the loop plus the next two
        vertex rings inward.
    ``phi_value`` optionally pins the protein fraction on the loop vertices.
    """

    kind: str = "free"
    axis: int | None = None
    phi_value: float | None = None

    _KINDS = ("free", "roller", "pinned", "fixed")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ParameterError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "roller":
            if self.axis not in (0, 1, 2):
                raise ParameterError("roller requires axis in {0,1,2}")


def parameter_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]
