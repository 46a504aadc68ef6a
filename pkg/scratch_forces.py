"""Scratch Taylor-exactness checks of every force term (not part of package)."""
import numpy as np

from memddg import meshgen
from memddg.geometry import measure, enclosed_volume
from memddg.energy import (
    bending_energy, dirichlet_energy, adsorption_energy, stretching_energy,
    pressure_energy,
)
from memddg.forces import (
    bending_force, capillary_force, osmotic_force, adsorption_force,
    line_tension_force, chemical_potentials, regularization_forces,
    regularization_energy, ReferenceMetrics,
)
from memddg.parameters import MembraneParameters, RegularizationWeights

rng = np.random.default_rng(11)
allok = True


def taylor_order(e_fun, g_fun, pos, rng, n_eps=7):
    """Fit the slope of |E(x+εd) − E(x) − ε⟨∇E,d⟩| vs ε on a log-log plot."""
    d = rng.standard_normal(pos.shape)
    d /= np.linalg.norm(d)
    e0 = e_fun(pos)
    g0 = g_fun(pos)  # force = −∇E
    slope_dir = -np.sum(g0 * d)
    eps = np.logspace(-6, -2, n_eps)
    rems = []
    for e in eps:
        r = abs(e_fun(pos + e * d) - e0 - e * slope_dir)
        rems.append(r)
    rems = np.array(rems)
    keep = rems > 64 * np.finfo(float).eps * max(1.0, abs(e0))
    if keep.sum() < 3:
        return np.inf, rems  # remainder at noise floor: exact
    s = np.polyfit(np.log(eps[keep]), np.log(rems[keep]), 1)[0]
    return s, rems


def report(name, slope, want=1.9):
    global allok
    ok = slope >= want
    allok &= ok
    print(f"{name:46s} order={slope:6.3f}  {'OK' if ok else 'FAIL'}")


params = MembraneParameters(
    kappa_b=8.22e-5, kappa_c=2e-4, hbar_0=0.3, hbar_c=6.0,
    K_A=1.0, A_bar=4 * np.pi, K_V=0.1, c_bar_over_n=0.35,
    epsilon=-1e-3, eta=5e-4, lambda_fixed=None,
)

for label, (mesh, pos) in {
    "closed sphere": meshgen.icosphere(2),
    "open patch": meshgen.hex_patch(1.0, rings=4),
}.items():
    pos = pos + 0.02 * rng.standard_normal(pos.shape)
    phi = rng.uniform(0.05, 0.95, mesh.n_vertices)
    closed = mesh.is_closed

    s, _ = taylor_order(
        lambda p: bending_energy(mesh, p, phi, params),
        lambda p: bending_force(mesh, p, phi, params),
        pos, rng)
    report(f"{label}: f_b", s)

    s, _ = taylor_order(
        lambda p: stretching_energy(float(measure(mesh, p).face_area.sum()), params),
        lambda p: capillary_force(mesh, p, params),
        pos, rng)
    report(f"{label}: f_s elastic", s)

    pf = MembraneParameters(kappa_b=1.0, lambda_fixed=1e-4, A_bar=1.0)
    s, _ = taylor_order(
        lambda p: stretching_energy(float(measure(mesh, p).face_area.sum()), pf),
        lambda p: capillary_force(mesh, p, pf),
        pos, rng)
    report(f"{label}: f_s fixed-tension", s)

    if closed:
        s, _ = taylor_order(
            lambda p: pressure_energy(enclosed_volume(mesh, p), params),
            lambda p: osmotic_force(mesh, p, params),
            pos, rng)
        report(f"{label}: f_p exact-law", s)
        pph = MembraneParameters(kappa_b=1.0, K_V=0.5, V_bar=2.91,
                                 use_phenomenological_pressure=True)
        s, _ = taylor_order(
            lambda p: pressure_energy(enclosed_volume(mesh, p), pph),
            lambda p: osmotic_force(mesh, p, pph),
            pos, rng)
        report(f"{label}: f_p phenomenological", s)

    s, _ = taylor_order(
        lambda p: dirichlet_energy(mesh, p, phi, params),
        lambda p: line_tension_force(mesh, p, phi, params),
        pos, rng)
    report(f"{label}: f_d", s)

    s, _ = taylor_order(
        lambda p: adsorption_energy(mesh, p, phi, params),
        lambda p: adsorption_force(mesh, p, phi, params),
        pos, rng)
    report(f"{label}: f_a", s)

    ref = ReferenceMetrics.from_mesh(mesh, pos + 0.01 * rng.standard_normal(pos.shape))
    w = RegularizationWeights(K_e=0.3, K_f=0.2, K_c=0.1)
    s, _ = taylor_order(
        lambda p: regularization_energy(mesh, p, ref, w),
        lambda p: regularization_forces(mesh, p, ref, w),
        pos, rng)
    report(f"{label}: f_reg", s)

# open-mesh pressure force (planar caps on tube)
mesh, pos = meshgen.tube(1.0, 4.0, target_edge_length=0.5)
phi = rng.uniform(0.1, 0.9, mesh.n_vertices)
pt = MembraneParameters(kappa_b=8.22e-5, K_V=0.01, c_bar_over_n=0.022)
bnd = mesh.is_boundary_vertex
# perturb interior vertices only, so caps stay planar
def taylor_interior(e_fun, g_fun):
    d = rng.standard_normal(pos.shape)
    d[bnd] = 0.0
    d /= np.linalg.norm(d)
    e0, g0 = e_fun(pos), g_fun(pos)
    sd = -np.sum(g0 * d)
    eps = np.logspace(-6, -2, 7)
    rems = np.array([abs(e_fun(pos + e * d) - e0 - e * sd) for e in eps])
    keep = rems > 64 * np.finfo(float).eps * max(1.0, abs(e0))
    if keep.sum() < 3:
        return np.inf
    return np.polyfit(np.log(eps[keep]), np.log(rems[keep]), 1)[0]

s = taylor_interior(
    lambda p: pressure_energy(enclosed_volume(mesh, p), pt),
    lambda p: osmotic_force(mesh, p, pt))
report("tube interior: f_p with caps", s)

# chemical potentials: Taylor in φ
mesh, pos = meshgen.icosphere(2)
pos += 0.02 * rng.standard_normal(pos.shape)
phi = rng.uniform(0.1, 0.9, mesh.n_vertices)


def taylor_phi(e_fun, mu_fun):
    d = rng.standard_normal(phi.shape)
    d /= np.linalg.norm(d)
    e0 = e_fun(phi)
    mu = mu_fun(phi)
    sd = -np.sum(mu * d)
    eps = np.logspace(-6, -2, 7)
    rems = np.array([abs(e_fun(phi + e * d) - e0 - e * sd) for e in eps])
    keep = rems > 64 * np.finfo(float).eps * max(1.0, abs(e0))
    if keep.sum() < 3:
        return np.inf, rems
    return np.polyfit(np.log(eps[keep]), np.log(rems[keep]), 1)[0], rems


s, _ = taylor_phi(
    lambda f: bending_energy(mesh, pos, f, params),
    lambda f: chemical_potentials(mesh, pos, f, params).mu_b)
report("sphere: mu_b", s)
s, _ = taylor_phi(
    lambda f: dirichlet_energy(mesh, pos, f, params),
    lambda f: chemical_potentials(mesh, pos, f, params).mu_d)
report("sphere: mu_d", s)
s, rems = taylor_phi(
    lambda f: adsorption_energy(mesh, pos, f, params),
    lambda f: chemical_potentials(mesh, pos, f, params).mu_a)
rel = rems.max() / max(1e-300, abs(adsorption_energy(mesh, pos, phi, params)))
ok = rel <= 1e-12
allok &= ok
print(f"{'sphere: mu_a machine-exact':46s} rel={rel:8.1e}  {'OK' if ok else 'FAIL'}")

# uniform-φ adsorption force reduces to −2εφ∫H⃗ per vertex
from memddg.curvature import curvature_vectors, accumulate_to_vertices
m = measure(mesh, pos)
vec = curvature_vectors(mesh, m)
phi_u = np.full(mesh.n_vertices, 0.3)
fa = adsorption_force(mesh, pos, phi_u, params, m=m, vec=vec)
fa_simple = -2.0 * params.epsilon * 0.3 * accumulate_to_vertices(mesh, vec.mean)
viol = np.abs(fa - fa_simple).max()
ok = viol < 1e-15
allok &= ok
print(f"{'uniform-phi f_a reduction':46s} err={viol:8.1e}  {'OK' if ok else 'FAIL'}")

print("ALL OK" if allok else "SOMETHING FAILED")
