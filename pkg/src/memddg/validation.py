"""Smooth references and the studies that measure the discretization against them.

Three instruments live here:

* :class:`SpheroidReference` — closed-form geometry of an oblate spheroid,
  self-checked against finite differences of the raw parametrization before
  any value is handed out as a reference.
* :func:`spheroid_convergence_study` — global and pointwise errors of the
  discrete measures across a subdivision sweep, with fitted orders.
* :func:`taylor_exactness_study` — remainder decay of first-order Taylor
  expansions driven by the implemented forces and chemical potentials.

:func:`scenario_assertions` turns a finished preset run into a list of
pass/fail property checks without raising, so a report can show every
outcome at once.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .curvature import (
    accumulate_to_vertices,
    cotan_laplacian,
    curvature_vectors,
    vertex_gaussian_curvature,
    vertex_mean_curvature,
)
from .energy import (
    adsorption_energy,
    bending_energy,
    dirichlet_energy,
    needs_volume,
    pressure_energy,
    stretching_energy,
)
from .forces import (
    adsorption_force,
    bending_force,
    capillary_force,
    chemical_potentials,
    line_tension_force,
    osmotic_force,
)
from .geometry import enclosed_volume, measure
from .halfedge import HalfedgeMesh
from .meshgen import spheroid
from .parameters import MembraneParameters, ReservoirSpec
from .solvers import l1_field_error


class ReferenceMismatch(RuntimeError):
    """Closed-form reference disagrees with its independent numerical oracle."""


# --------------------------------------------------------------------------
# analytic spheroid
# --------------------------------------------------------------------------


def _d5(f, x, h):
    """Five-point first derivative (fourth-order accurate)."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


@dataclass(frozen=True)
class SpheroidReference:
    """Closed-form geometry of the spheroid x²/a² + y²/a² + z²/c² = 1.

    Parametrized by latitude β and longitude θ as
    (a·cosβ·cosθ, a·cosβ·sinθ, c·sinβ); all scalar fields are functions of β
    alone. The curvature convention makes the unit sphere have H = +1 with
    outward normals.

    Call :meth:`verified` to get an instance whose every closed form has been
    compared against finite differences of the raw parametrization (and
    Gauss–Legendre sums of those differences) to 1e-8.
    """

    a: float = 1.0
    c: float = 0.5

    # -- scalar fields of latitude ------------------------------------

    def _w(self, beta):
        """Metric radical √(a²sin²β + c²cos²β)."""
        return np.sqrt((self.a * np.sin(beta)) ** 2 + (self.c * np.cos(beta)) ** 2)

    def _dw(self, beta):
        return (self.a**2 - self.c**2) * np.sin(beta) * np.cos(beta) / self._w(beta)

    def latitude(self, positions: np.ndarray) -> np.ndarray:
        """β recovered from the z coordinate of on-surface points."""
        z = np.asarray(positions)[..., 2]
        return np.arcsin(np.clip(z / self.c, -1.0, 1.0))

    def mean_curvature_at(self, beta):
        """H(β) = (κ_meridian + κ_parallel)/2 = (ac/w³ + c/(aw))/2."""
        w = self._w(beta)
        return 0.5 * (self.a * self.c / w**3 + self.c / (self.a * w))

    def gaussian_curvature_at(self, beta):
        return self.c**2 / self._w(beta) ** 4

    def _dH(self, beta):
        """dH/dβ, differentiating both principal curvatures through w."""
        w = self._w(beta)
        return -self._dw(beta) * (
            1.5 * self.a * self.c / w**4 + 0.5 * self.c / (self.a * w**2)
        )

    def laplacian_mean_curvature_at(self, beta):
        """Surface Laplacian Δ_s H from the axisymmetric form
        Δf = (rw)⁻¹ ∂_β[(r/w) ∂_β f] with r = a·cosβ.

        The bracketed product is differentiated with a five-point stencil of
        the analytic integrand; at the poles (r → 0) the evaluation point is
        nudged inward, which only matters at the 1e-8 level.
        """
        beta = np.asarray(beta, dtype=np.float64)
        near_pole = np.abs(np.cos(beta)) < 1e-4
        beta = np.where(near_pole, np.sign(beta) * (np.pi / 2 - 1e-4), beta)

        def q(b):
            return (self.a * np.cos(b) / self._w(b)) * self._dH(b)

        # small step: the profile's high derivatives grow like (a/c)^k, so
        # truncation would dominate at the usual 1e-3
        dq = _d5(q, beta, 2e-4)
        return dq / (self.a * np.cos(beta) * self._w(beta))

    # -- per-vertex fields --------------------------------------------

    def mean_curvature(self, positions: np.ndarray) -> np.ndarray:
        return self.mean_curvature_at(self.latitude(positions))

    def gaussian_curvature(self, positions: np.ndarray) -> np.ndarray:
        return self.gaussian_curvature_at(self.latitude(positions))

    def laplacian_mean_curvature(self, positions: np.ndarray) -> np.ndarray:
        return self.laplacian_mean_curvature_at(self.latitude(positions))

    def normals(self, positions: np.ndarray) -> np.ndarray:
        """Outward unit normals, from the gradient of the implicit function."""
        n = np.asarray(positions, dtype=np.float64) / np.array(
            [self.a**2, self.a**2, self.c**2]
        )
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    # -- global quantities --------------------------------------------

    @property
    def volume(self) -> float:
        return 4.0 * np.pi * self.a**2 * self.c / 3.0

    def _quad(self, integrand, n: int = 192) -> float:
        """∫ over the surface of a function of β: 2π·∫ f(β)·r·w dβ."""
        x, wgt = np.polynomial.legendre.leggauss(n)
        beta = 0.5 * np.pi * x
        r = self.a * np.cos(beta)
        return float(
            2.0 * np.pi * 0.5 * np.pi * np.sum(wgt * integrand(beta) * r * self._w(beta))
        )

    @property
    def area(self) -> float:
        return self._quad(lambda b: np.ones_like(b))

    @property
    def integral_mean_curvature(self) -> float:
        return self._quad(self.mean_curvature_at)

    @property
    def integral_squared_mean_curvature(self) -> float:
        return self._quad(lambda b: self.mean_curvature_at(b) ** 2)

    # -- independent oracle -------------------------------------------

    def self_check(self, n_nodes: int = 192) -> dict[str, float]:
        """Deviation of every closed form from an oracle built purely from
        finite differences of σ(β,θ) = (a·cosβ·cosθ, a·cosβ·sinθ, c·sinβ).

        Fundamental forms come from five-point stencils, integrals from
        Gauss–Legendre sums of those stencil values; nothing on the oracle
        side reuses the closed-form w, H, or K.
        """
        a, c = self.a, self.c

        def sigma(beta, theta):
            return np.stack(
                [a * np.cos(beta) * np.cos(theta), a * np.cos(beta) * np.sin(theta), c * np.sin(beta)],
                axis=-1,
            )

        x, wgt = np.polynomial.legendre.leggauss(n_nodes)
        beta = 0.5 * np.pi * x

        def forms(theta):
            h = 1e-3
            sb = _d5(lambda b: sigma(b, theta), beta, h)
            st = _d5(lambda t: sigma(beta, t), theta, h)
            sbb = _d5(lambda b: _d5(lambda bb: sigma(bb, theta), b, h), beta, h)
            sbt = _d5(lambda t: _d5(lambda b: sigma(b, t), beta, h), theta, h)
            stt = _d5(lambda t: _d5(lambda tt: sigma(beta, tt), t, h), theta, h)
            E = np.einsum("ij,ij->i", sb, sb)
            F = np.einsum("ij,ij->i", sb, st)
            G = np.einsum("ij,ij->i", st, st)
            n = np.cross(sb, st)
            n /= np.linalg.norm(n, axis=1, keepdims=True)
            # orient outward (the raw cross product points inward here)
            flip = np.einsum("ij,ij->i", n, sigma(beta, theta)) < 0.0
            n[flip] *= -1.0
            L = np.einsum("ij,ij->i", sbb, n)
            M = np.einsum("ij,ij->i", sbt, n)
            N = np.einsum("ij,ij->i", stt, n)
            g = E * G - F**2
            sqrtg = np.sqrt(g)
            # sign: with the outward orientation, II is negative definite on
            # convex bodies, so H = −(EN − 2FM + GL)/(2g) is positive there.
            H = -(E * N - 2 * F * M + G * L) / (2 * g)
            K = (L * N - M**2) / g
            return H, K, n, sqrtg

        H0, K0, n0, sqrtg0 = forms(0.0)
        H1, K1, _, sqrtg1 = forms(0.7)
        pts = sigma(beta, 0.0)

        scale = 0.5 * np.pi * 2.0 * np.pi
        area_o = scale * float(np.sum(wgt * sqrtg0))
        int_h_o = scale * float(np.sum(wgt * H0 * sqrtg0))
        int_h2_o = scale * float(np.sum(wgt * H0**2 * sqrtg0))
        vol_o = scale / 3.0 * float(np.sum(wgt * np.einsum("ij,ij->i", pts, n0) * sqrtg0))

        # oracle for Δ_s H: nested stencils over the verified H(β) profile
        def qfd(b):
            return (a * np.cos(b) / self._w(b)) * _d5(self.mean_curvature_at, b, 5e-4)

        lap_o = _d5(qfd, beta, 5e-4) / (a * np.cos(beta) * self._w(beta))
        lap = self.laplacian_mean_curvature_at(beta)

        rel = lambda got, ref: abs(got - ref) / max(abs(ref), 1.0)
        return {
            "H": float(np.max(np.abs(H0 - self.mean_curvature_at(beta)))),
            "K": float(np.max(np.abs(K0 - self.gaussian_curvature_at(beta)))),
            "normal": float(np.max(np.linalg.norm(n0 - self.normals(pts), axis=1))),
            "area": rel(area_o, self.area),
            "volume": rel(vol_o, self.volume),
            "int_H": rel(int_h_o, self.integral_mean_curvature),
            "int_H2": rel(int_h2_o, self.integral_squared_mean_curvature),
            "laplacian_H": float(np.max(np.abs(lap_o - lap) / (1.0 + np.abs(lap)))),
            "axisymmetry": float(
                max(np.max(np.abs(H0 - H1)), np.max(np.abs(sqrtg0 - sqrtg1)))
            ),
        }

    def verified(self, tol: float = 1e-8) -> "SpheroidReference":
        """Return self after the oracle comparison; raise if any closed form
        deviates by more than ``tol``."""
        dev = self.self_check()
        bad = {k: v for k, v in dev.items() if v > tol}
        if bad:
            raise ReferenceMismatch(
                f"spheroid a={self.a} c={self.c}: closed forms deviate from the "
                f"finite-difference oracle: {bad}"
            )
        return self


# --------------------------------------------------------------------------
# convergence study
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    """Error of one quantity across the subdivision sweep."""

    name: str
    kind: str  # "global" | "local" | "vector" | "proxy" | "exact"
    errors: np.ndarray
    slope: float | None


@dataclass(frozen=True)
class ConvergenceReport:
    subdivisions: tuple[int, ...]
    edge_length: np.ndarray  # mean edge length per level
    h: np.ndarray  # edge length normalized so the finest level is 1
    rows: dict[str, ConvergenceRow]

    def slope(self, name: str) -> float | None:
        return self.rows[name].slope

    def to_csv(self, path) -> None:
        names = list(self.rows)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subdivision", "edge_length", "h"] + names)
            for k, s in enumerate(self.subdivisions):
                w.writerow(
                    [s, repr(float(self.edge_length[k])), repr(float(self.h[k]))]
                    + [repr(float(self.rows[n].errors[k])) for n in names]
                )
            w.writerow(
                ["slope", "", ""]
                + ["" if self.rows[n].slope is None else f"{self.rows[n].slope:.3f}" for n in names]
            )

    def summary(self) -> str:
        lines = ["quantity                     kind     slope   finest error"]
        for n, row in self.rows.items():
            s = "   --" if row.slope is None else f"{row.slope:5.2f}"
            lines.append(f"{n:28s} {row.kind:8s} {s}   {row.errors[-1]:.3e}")
        return "\n".join(lines)


def _fit_slope(h: np.ndarray, err: np.ndarray, n_fit: int = 3) -> float | None:
    """Least-squares order from the finest ``n_fit`` levels; None when the
    errors sit at rounding level and carry no rate information."""
    hh, ee = h[-n_fit:], err[-n_fit:]
    if np.any(ee <= 0.0) or np.max(ee) < 1e-12:
        return None
    return float(np.polyfit(np.log(hh), np.log(ee), 1)[0])


def spheroid_convergence_study(
    subdivisions: tuple[int, ...] = (2, 3, 4, 5),
    a: float = 1.0,
    c: float = 0.5,
    reference: SpheroidReference | None = None,
) -> ConvergenceReport:
    """Errors of the discrete measures against the analytic spheroid.

    Global rows compare totals (area, volume, ∫H dA, ∫H² dA, and the exact
    angle-defect total against 4π); local rows are area-normalized L1 errors
    of the integrated vertex quantities against the smooth field times the
    dual area. The two biharmonic rows probe quantities with no pointwise
    limit and are reported without a rate gate.
    """
    if len(subdivisions) < 3:
        raise ValueError("need at least three levels to fit an order")
    ref = (reference or SpheroidReference(a, c)).verified()

    names_kinds = [
        ("area", "global"),
        ("volume", "global"),
        ("total_mean_curvature", "global"),
        ("total_squared_curvature", "global"),
        ("total_gauss_curvature", "exact"),
        ("mean_curvature", "local"),
        ("gauss_curvature", "local"),
        ("mean_curvature_vector", "vector"),
        ("gauss_curvature_vector", "vector"),
        ("biharmonic_vector", "proxy"),
        ("biharmonic_scalar", "proxy"),
    ]
    errs = {n: [] for n, _ in names_kinds}
    h_mean = []

    for s in subdivisions:
        mesh, pos = spheroid(s, a=ref.a, c=ref.c)
        m = measure(mesh, pos)
        h_mean.append(float(m.edge_length.mean()))

        area_d = float(m.face_area.sum())
        vol_d = enclosed_volume(mesh, pos)
        int_h = vertex_mean_curvature(mesh, m)
        int_k = vertex_gaussian_curvature(mesh, m)
        a_i = m.vertex_dual_area

        errs["area"].append(abs(area_d - ref.area))
        errs["volume"].append(abs(vol_d - ref.volume))
        errs["total_mean_curvature"].append(
            abs(float(int_h.sum()) - ref.integral_mean_curvature)
        )
        errs["total_squared_curvature"].append(
            abs(float(np.sum(int_h**2 / a_i)) - ref.integral_squared_mean_curvature)
        )
        errs["total_gauss_curvature"].append(abs(float(int_k.sum()) - 4.0 * np.pi))

        h_s = ref.mean_curvature(pos)
        k_s = ref.gaussian_curvature(pos)
        n_s = ref.normals(pos)
        lap_s = ref.laplacian_mean_curvature(pos)
        A = ref.area

        errs["mean_curvature"].append(l1_field_error(int_h, h_s * a_i, A))
        errs["gauss_curvature"].append(l1_field_error(int_k, k_s * a_i, A))

        vec = curvature_vectors(mesh, m)
        two_h_vec = accumulate_to_vertices(mesh, vec.twice_mean)
        k_vec = accumulate_to_vertices(mesh, vec.gauss)
        errs["mean_curvature_vector"].append(
            l1_field_error(two_h_vec, 2.0 * (h_s * a_i)[:, None] * n_s, A)
        )
        errs["gauss_curvature_vector"].append(
            l1_field_error(k_vec, (k_s * a_i)[:, None] * n_s, A)
        )

        # biharmonic proxies: H·(accumulated Schläfli vectors) against
        # Δ_sH·A·n̂, and the cotangent stiffness applied to pointwise H
        # against ∫Δ_sH (the stiffness matrix represents −Δ).
        h_pt = int_h / a_i
        schlafli = accumulate_to_vertices(mesh, vec.s1 + vec.s2)
        errs["biharmonic_vector"].append(
            l1_field_error(
                h_pt[:, None] * schlafli, (lap_s * a_i)[:, None] * n_s, A
            )
        )
        lap_d = -(cotan_laplacian(mesh, m) @ h_pt)
        errs["biharmonic_scalar"].append(l1_field_error(lap_d, lap_s * a_i, A))

    edge_length = np.array(h_mean)
    h = edge_length / edge_length[-1]
    rows = {}
    for n, kind in names_kinds:
        e = np.array(errs[n])
        rows[n] = ConvergenceRow(
            name=n, kind=kind, errors=e, slope=None if kind == "exact" else _fit_slope(h, e)
        )
    return ConvergenceReport(
        subdivisions=tuple(subdivisions), edge_length=edge_length, h=h, rows=rows
    )


def write_pointwise_curvature_csv(
    path,
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    reference: SpheroidReference | None = None,
) -> None:
    """Per-vertex discrete vs smooth curvature columns, for external plotting.

    Nothing is asserted here: the point of the file is to eyeball where on
    the surface the discrete operators deviate.
    """
    ref = reference or SpheroidReference()
    m = measure(mesh, positions)
    a_i = m.vertex_dual_area
    h_d = vertex_mean_curvature(mesh, m) / a_i
    k_d = vertex_gaussian_curvature(mesh, m) / a_i
    h_s = ref.mean_curvature(positions)
    k_s = ref.gaussian_curvature(positions)
    n_s = ref.normals(positions)
    vec = curvature_vectors(mesh, m)
    hv = accumulate_to_vertices(mesh, vec.twice_mean)
    kv = accumulate_to_vertices(mesh, vec.gauss)
    hv_err = np.linalg.norm(hv - 2.0 * (h_s * a_i)[:, None] * n_s, axis=1)
    kv_err = np.linalg.norm(kv - (k_s * a_i)[:, None] * n_s, axis=1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["vertex", "x", "y", "z", "dual_area",
             "H_discrete", "H_smooth", "K_discrete", "K_smooth",
             "H_vector_err", "K_vector_err"]
        )
        for i in range(mesh.n_vertices):
            w.writerow(
                [i]
                + [repr(float(v)) for v in positions[i]]
                + [repr(float(x)) for x in
                   (a_i[i], h_d[i], h_s[i], k_d[i], k_s[i], hv_err[i], kv_err[i])]
            )


# --------------------------------------------------------------------------
# Taylor exactness study
# --------------------------------------------------------------------------

TAYLOR_TERMS = ("f_b", "f_s", "f_p", "f_d", "f_a", "mu_b", "mu_d", "mu_a")


@dataclass(frozen=True)
class TaylorRow:
    """Remainder decay for one force or potential term.

    ``machine_exact`` means every remainder sat below the rounding floor, so
    no rate could (or needed to) be fitted — either the term's linearization
    is exact, or the term is disabled and contributes nothing at all.
    """

    term: str
    eps: np.ndarray
    remainder: np.ndarray
    relative: np.ndarray
    order: float | None
    machine_exact: bool


@dataclass(frozen=True)
class TaylorReport:
    rows: dict[str, TaylorRow]

    def order(self, term: str) -> float | None:
        return self.rows[term].order

    def summary(self) -> str:
        lines = ["term    order    max relative remainder"]
        for t, row in self.rows.items():
            o = "exact" if row.machine_exact else f"{row.order:.3f}"
            lines.append(f"{t:6s} {o:>7s}   {row.relative.max():.3e}")
        return "\n".join(lines)


def taylor_exactness_study(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    phi: np.ndarray,
    params: MembraneParameters,
    reservoir: ReservoirSpec | None = None,
    terms: tuple[str, ...] = TAYLOR_TERMS,
    eps: np.ndarray | None = None,
    seed: int = 0,
    mask: np.ndarray | None = None,
) -> TaylorReport:
    """Fit the order of the Taylor remainder |E(x+εδ) − E(x) + ε⟨g,δ⟩| per term.

    ``g`` is the implemented force (for shape terms, perturbing positions) or
    chemical potential (for μ terms, perturbing φ); both are −∂E, hence the
    plus sign in the remainder. An exactly implemented gradient leaves a pure
    second-order remainder, so fitted orders should sit at 2.

    φ must stay inside (0, 1) over the whole ε span, otherwise the clamped
    protein laws introduce kinks that have nothing to do with gradient
    quality. ``mask`` (V, 3) zeroes components of the shape perturbation —
    needed on open meshes with a pressure law, whose volume closure requires
    the boundary rims to stay planar.
    """
    if eps is None:
        eps = np.logspace(-6.0, -2.0, 9)
    eps = np.asarray(eps, dtype=np.float64)
    rng = np.random.default_rng(seed)
    x0 = np.asarray(positions, dtype=np.float64)
    phi0 = np.asarray(phi, dtype=np.float64)

    dx = rng.standard_normal(x0.shape)
    if mask is not None:
        dx *= mask
    dx /= np.linalg.norm(dx)
    dphi = rng.standard_normal(phi0.shape)
    dphi /= np.max(np.abs(dphi))

    def e_b(x, p):
        return bending_energy(mesh, x, p, params)

    def e_s(x, p):
        if params.lambda_fixed is None and params.K_A == 0.0:
            return 0.0
        return stretching_energy(float(measure(mesh, x).face_area.sum()), params, reservoir)

    def e_p(x, p):
        if not needs_volume(params):
            return 0.0
        return pressure_energy(enclosed_volume(mesh, x), params, reservoir)

    def e_d(x, p):
        return dirichlet_energy(mesh, x, p, params)

    def e_a(x, p):
        return adsorption_energy(mesh, x, p, params)

    shape_terms = {
        "f_b": (e_b, lambda: bending_force(mesh, x0, phi0, params)),
        "f_s": (e_s, lambda: capillary_force(mesh, x0, params, reservoir)),
        "f_p": (e_p, lambda: osmotic_force(mesh, x0, params, reservoir)),
        "f_d": (e_d, lambda: line_tension_force(mesh, x0, phi0, params)),
        "f_a": (e_a, lambda: adsorption_force(mesh, x0, phi0, params)),
    }
    chem_energy = {"mu_b": e_b, "mu_d": e_d, "mu_a": e_a}
    mu = None

    rows: dict[str, TaylorRow] = {}
    for term in terms:
        if term in shape_terms:
            e_fn, g_fn = shape_terms[term]
            g = g_fn()
            lin = float(np.sum(g * dx))
            e0 = e_fn(x0, phi0)
            rem = np.array([abs(e_fn(x0 + t * dx, phi0) - e0 + t * lin) for t in eps])
        elif term in chem_energy:
            if mu is None:
                mu = chemical_potentials(mesh, x0, phi0, params)
            g = {"mu_b": mu.mu_b, "mu_d": mu.mu_d, "mu_a": mu.mu_a}[term]
            lin = float(np.sum(g * dphi))
            e_fn = chem_energy[term]
            e0 = e_fn(x0, phi0)
            rem = np.array([abs(e_fn(x0, phi0 + t * dphi) - e0 + t * lin) for t in eps])
        else:
            raise KeyError(f"unknown Taylor term {term!r}")

        scale = max(abs(e0), abs(lin) * float(eps.max()))
        if scale == 0.0:
            # starting at a critical point of this term: the only available
            # magnitude is the second-order response itself
            scale = max(float(rem.max()), 1e-300)
        relative = rem / scale
        # rounding in the energy difference random-walks over the mesh sums,
        # so the fit floor grows with the perturbed vector's length; the
        # smallest observed remainder doubles as an empirical noise estimate
        # for terms whose value is cancellation-reduced, where the analytic
        # floor is far too optimistic
        dof = dx.size if term in shape_terms else dphi.size
        floor = 64.0 * np.sqrt(dof) * np.finfo(np.float64).eps * scale
        live = rem > max(floor, 8.0 * float(rem.min()))
        if np.count_nonzero(live) < 2:
            rows[term] = TaylorRow(term, eps, rem, relative, None, True)
        else:
            order = float(np.polyfit(np.log(eps[live]), np.log(rem[live]), 1)[0])
            rows[term] = TaylorRow(term, eps, rem, relative, order, False)
    return TaylorReport(rows=rows)


def write_taylor_csv(path, report: TaylorReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["term", "eps", "remainder", "relative", "order", "machine_exact"])
        for t, row in report.rows.items():
            o = "" if row.order is None else f"{row.order:.4f}"
            for e, r, rel in zip(row.eps, row.remainder, row.relative):
                w.writerow([t, repr(float(e)), repr(float(r)), repr(float(rel)), o, row.machine_exact])


# --------------------------------------------------------------------------
# scenario-level property checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioCheck:
    """One post-hoc property of a finished run; ``passed`` is None for rows
    that only report a number without gating anything."""

    name: str
    passed: bool | None
    detail: str


def scenario_assertions(result, preset=None) -> list[ScenarioCheck]:
    """Property checks for a finished preset run, reported rather than thrown.

    The generic rows (descent, φ interior) apply everywhere; family-specific
    rows look at what the scenario is supposed to maintain or produce.
    """
    if preset is None:
        from .presets import make_preset

        preset = make_preset(result.preset_name)

    checks: list[ScenarioCheck] = []
    pos = result.state.positions
    name = result.preset_name

    wi = result.worst_increase
    checks.append(
        ScenarioCheck(
            "monotone_descent",
            bool(wi <= 0.0),
            f"worst accepted objective change {wi:+.3e}",
        )
    )

    if preset.run_mode in ("protein", "coupled"):
        lo, hi = result.phi_min, result.phi_max
        checks.append(
            ScenarioCheck(
                "phi_interior",
                bool(lo > 0.0 and hi < 1.0),
                f"phi stayed in [{lo:.4g}, {hi:.4g}]",
            )
        )

    if name.startswith("vesicle"):
        rep = result.report
        tol = preset.solver.tolerance
        checks.append(
            ScenarioCheck(
                "minimizer_converged",
                bool(rep.reason == "converged" and rep.residual <= tol),
                f"{rep.reason} after {rep.steps} steps, residual {rep.residual:.3e}",
            )
        )
        a_bar = result.system.params.A_bar
        if a_bar:
            area = float(measure(result.mesh, pos).face_area.sum())
            strain = abs(area - a_bar) / a_bar
            checks.append(
                ScenarioCheck(
                    "areal_strain", bool(strain < 0.01), f"|A−Ā|/Ā = {strain:.3e}"
                )
            )

    if name.startswith("tube"):
        length = float(preset.generator_args.get("length", 0.0))
        rim = np.concatenate(
            [result.mesh.origin[loop] for loop in result.mesh.boundary_loops]
        )
        ends = np.unique(pos[rim, 2])
        held = ends.size == 2 and ends[0] == 0.0 and ends[1] == length
        checks.append(
            ScenarioCheck(
                "roller_planes_held",
                bool(held),
                f"boundary z values {ends.tolist()} vs [0.0, {length}]",
            )
        )

    if name.startswith("patch"):
        checks.append(
            ScenarioCheck("dome_height", None, f"max |z| = {np.abs(pos[:, 2]).max():.4f}")
        )

    if name.startswith("bud"):
        vol = enclosed_volume(result.mesh, pos)
        v_bar = result.system.params.V_bar
        checks.append(
            ScenarioCheck("volume", None, f"V = {vol:.4f} (target {v_bar})")
        )

    return checks
