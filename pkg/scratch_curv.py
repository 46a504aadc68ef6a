"""Scratch verification of curvature.py (not part of the package)."""
import numpy as np

from memddg import meshgen
from memddg import curvature as cv
from memddg import derivatives as dv
from memddg.geometry import measure

rng = np.random.default_rng(3)
allok = True


def report(name, err, tol):
    global allok
    ok = err < tol
    allok &= ok
    print(f"{name:44s} {err:10.2e}  {'OK' if ok else 'FAIL'}")


# --- sphere identities ---
mesh, pos = meshgen.icosphere(3)
m = measure(mesh, pos)
H = cv.vertex_mean_curvature(mesh, m, pointwise=True)
w = m.vertex_dual_area / m.vertex_dual_area.sum()
report("sphere mean|H-1| small", (w * np.abs(H - 1.0)).sum(), 2e-2)
K = cv.vertex_gaussian_curvature(mesh, m, pointwise=True)
report("sphere mean|K-1| small", (w * np.abs(K - 1.0)).sum(), 2e-2)
chi = mesh.euler_characteristic
gb = abs(cv.vertex_gaussian_curvature(mesh, m).sum() - 2 * np.pi * chi)
report("Gauss-Bonnet closed", gb, 1e-12 * mesh.n_vertices)

vec = cv.curvature_vectors(mesh, m)
v2h = cv.accumulate_to_vertices(mesh, vec.twice_mean)
diag, _ = dv.dual_area_gradients(mesh, m)
report("Σ∫2H⃗ == 3·∇A_dual", np.abs(v2h - 3 * diag).max(), 1e-13)
L = cv.cotan_laplacian(mesh, m)
report("L·r == Σ∫2H⃗", np.abs(L @ pos - v2h).max(), 1e-13)
s12 = cv.accumulate_to_vertices(mesh, vec.s1 + vec.s2)
report("Schläfli Σ(s1+s2)=0 closed", np.abs(s12).max(), 1e-12)
vg = cv.accumulate_to_vertices(mesh, vec.gauss)
nrm = dv.integrated_vertex_normals(mesh, m)
# direction check: gauss vector ≈ K·A·n̂ on the sphere
report("sphere vertex gauss ≈ A·n̂", np.abs(vg - nrm).max() / np.abs(nrm).max(), 0.1)

# --- FD of ∇ total ∫H on an open, noisy mesh (tests every mask) ---
mesh, pos = meshgen.hex_patch(1.0, rings=3)
pos = pos + 0.05 * rng.standard_normal(pos.shape)
m = measure(mesh, pos)
vec = cv.curvature_vectors(mesh, m)
ana = cv.accumulate_to_vertices(mesh, vec.gauss) + 0.5 * cv.accumulate_to_vertices(
    mesh, vec.s1 + vec.s2
)


def total_intH(p):
    mm = measure(mesh, p)
    return cv.edge_mean_curvature(mesh, mm).sum()


num = np.zeros_like(pos)
for i in range(mesh.n_vertices):
    for d in range(3):
        p = pos.copy(); p[i, d] += 1e-6; fp = total_intH(p)
        p = pos.copy(); p[i, d] -= 1e-6; fm = total_intH(p)
        num[i, d] = (fp - fm) / 2e-6
report("open mesh ∇Σ∫H == gauss+½(s1+s2)", np.abs(ana - num).max(), 5e-6)

# --- FD of ∇_{r_i}∫H_i and ∇_{r_i}∫H_j (diag/offdiag bending ingredients) ---
intH = lambda p: cv.vertex_mean_curvature(mesh, measure(mesh, p))
probes = [0, 10, 20, 33]  # mix of interior and boundary-adjacent
Kacc = cv.accumulate_to_vertices(mesh, vec.gauss)
S1acc = cv.accumulate_to_vertices(mesh, vec.s1)
err_d = 0.0
err_o = 0.0
for i in probes:
    for d in range(3):
        p = pos.copy(); p[i, d] += 1e-6; fp = intH(p)
        p = pos.copy(); p[i, d] -= 1e-6; fm = intH(p)
        g = (fp - fm) / 2e-6
        err_d = max(err_d, abs(g[i] - 0.5 * (Kacc[i, d] + S1acc[i, d])))
        for h in mesh.outgoing_halfedges(i):
            jv = mesh.halfedge_target[h]
            ana_o = 0.5 * (vec.gauss[h, d] + vec.s2[h, d])
            err_o = max(err_o, abs(g[jv] - ana_o))
report("∇_{ri}∫H_i == ½(K⃗+S⃗1) per vertex", err_d, 5e-6)
report("∇_{ri}∫H_j == ½(K⃗+S⃗2) per halfedge", err_o, 5e-6)

# --- Laplacian identity + Dirichlet equality on the open mesh ---
L = cv.cotan_laplacian(mesh, m)
v2h = cv.accumulate_to_vertices(mesh, cv.curvature_vectors(mesh, m).twice_mean)
report("open L·r == Σ∫2H⃗", np.abs(L @ pos - v2h).max(), 1e-12)
phi = rng.random(mesh.n_vertices)
g = cv.face_surface_gradient(mesh, m, phi)
e_face = (m.face_area * np.einsum("ij,ij->i", g, g)).sum()
e_quad = phi @ (L @ phi)
report("Σ A‖∇φ‖² == φᵀLφ", abs(e_face - e_quad), 1e-12 * max(1, abs(e_quad)))

# --- face gradient reproduces linear fields on a flat mesh ---
mesh2, pos2 = meshgen.hex_patch(1.0, rings=2)
m2 = measure(mesh2, pos2)
gx = cv.face_surface_gradient(mesh2, m2, pos2[:, 0])
report("flat ∇(x) == (1,0,0)", np.abs(gx - np.array([1.0, 0, 0])).max(), 1e-13)

ev = np.linalg.eigvalsh(L.toarray())
report("L PSD (min eig ≥ -1e-12)", max(0.0, -ev.min()), 1e-12)

print("ALL OK" if allok else "SOMETHING FAILED")
