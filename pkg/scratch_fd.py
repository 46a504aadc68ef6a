"""Scratch FD check of derivatives.py (not part of the package)."""
import numpy as np

from memddg import meshgen
from memddg.geometry import measure, closure_volume, enclosed_volume, total_area
from memddg.halfedge import build_from_faces
from memddg import derivatives as dv

rng = np.random.default_rng(7)


def fd_grad(fun, pos, eps=1e-6):
    g = np.zeros_like(pos)
    for i in range(pos.shape[0]):
        for d in range(3):
            p = pos.copy(); p[i, d] += eps; fp = fun(p)
            m = pos.copy(); m[i, d] -= eps; fm = fun(m)
            g[i, d] = (fp - fm) / (2 * eps)
    return g


def report(name, analytic, numeric, tol=5e-6):
    err = np.abs(analytic - numeric).max()
    scale = max(1.0, np.abs(numeric).max())
    ok = err / scale < tol
    print(f"{name:34s} max|Δ|={err:9.2e}  rel={err/scale:9.2e}  {'OK' if ok else 'FAIL'}")
    return ok


mesh, pos0 = meshgen.hex_patch(1.0, rings=3)
pos0 = pos0 + 0.05 * rng.standard_normal(pos0.shape)  # break planarity
m = measure(mesh, pos0)
allok = True

# --- face areas ---
fag = dv.face_area_gradients(mesh, m)
f_probe = 7
num = fd_grad(lambda p: measure(mesh, p).face_area[f_probe], pos0)
ana = np.zeros_like(pos0)
for c in range(3):
    ana[mesh.faces[f_probe, c]] += fag[f_probe, c]
allok &= report("face area", ana, num)

# --- corner angles ---
cag = dv.corner_angle_gradients(mesh, m)
for corner in (0, 1, 2):
    num = fd_grad(lambda p: measure(mesh, p).corner_angle[f_probe, corner], pos0)
    ana = np.zeros_like(pos0)
    for d in range(3):
        ana[mesh.faces[f_probe, d]] += cag[f_probe, corner, d]
    allok &= report(f"corner angle c={corner}", ana, num)

# --- edge lengths ---
elg = dv.edge_length_gradients(mesh, m)
e_probe = 11
num = fd_grad(lambda p: measure(mesh, p).edge_length[e_probe], pos0)
ana = np.zeros_like(pos0)
ana[mesh.edges[e_probe, 0]] += elg[e_probe, 0]
ana[mesh.edges[e_probe, 1]] += elg[e_probe, 1]
allok &= report("edge length", ana, num)

# --- dihedral angles (pick an interior edge) ---
dig = dv.dihedral_angle_gradients(mesh, m)
dia = dv.edge_diamond(mesh)
interior_edges = np.flatnonzero(~mesh.edge_is_boundary)
for e_probe in interior_edges[[0, 5, 17]]:
    num = fd_grad(lambda p: measure(mesh, p).dihedral_angle[e_probe], pos0)
    ana = np.zeros_like(pos0)
    for s in range(4):
        ana[dia[e_probe, s]] += dig[e_probe, s]
    allok &= report(f"dihedral edge={e_probe}", ana, num)

# --- dual areas: diagonal + off-diagonal ---
diag, off = dv.dual_area_gradients(mesh, m)
v_probe = 9
num = fd_grad(lambda p: measure(mesh, p).vertex_dual_area[v_probe], pos0)
ana = np.zeros_like(pos0)
ana[v_probe] = diag[v_probe]
for h in mesh.outgoing_halfedges(v_probe):
    # d A_target / d r_probe lands in row target; we want dA_probe/dr_*:
    pass
# off[h] is dA_target(h)/dr_origin(h); incoming halfedges give dA_probe/dr_neighbor
for h in mesh.outgoing_halfedges(v_probe):
    t = mesh.twin[h]
    ana[mesh.origin[t]] += off[t]
allok &= report("dual area diag+off", ana, num)

# --- volume gradient on a closed mesh ---
smesh, sp = meshgen.icosphere(2)
sp = sp + 0.03 * rng.standard_normal(sp.shape)
vg = dv.volume_gradient(smesh, sp)
num = fd_grad(lambda p: enclosed_volume(smesh, p), sp[:40]) if False else None
# cheaper: probe a handful of vertices
probe = [0, 3, 11, 25]
numv = np.zeros((len(probe), 3))
for a, i in enumerate(probe):
    for d in range(3):
        p = sp.copy(); p[i, d] += 1e-6; fp = enclosed_volume(smesh, p)
        p = sp.copy(); p[i, d] -= 1e-6; fm = enclosed_volume(smesh, p)
        numv[a, d] = (fp - fm) / 2e-6
allok &= report("volume grad (closed)", vg[probe], numv)
ivn = dv.integrated_vertex_normals(smesh, measure(smesh, sp))
allok &= report("∫n == ∇V (closed)", vg, ivn, tol=1e-12)

# --- closure volume gradient on tube ---
tmesh, tp = meshgen.tube(1.0, 4.0, target_edge_length=0.7)
cg = dv.closure_volume_gradient(tmesh, tp)
bverts = np.flatnonzero(tmesh.is_boundary_vertex)[:5]
numc = np.zeros((len(bverts), 3))
for a, i in enumerate(bverts):
    for d in range(3):
        p = tp.copy(); p[i, d] += 1e-6; fp = closure_volume(tmesh, p)
        p = tp.copy(); p[i, d] -= 1e-6; fm = closure_volume(tmesh, p)
        numc[a, d] = (fp - fm) / 2e-6
allok &= report("closure volume grad", cg[bverts], numc)

# full open-mesh volume gradient = mesh part + closure part
full = dv.volume_gradient(tmesh, tp) + cg
i = bverts[2]
numf = np.zeros(3)
for d in range(3):
    p = tp.copy(); p[i, d] += 1e-6; fp = enclosed_volume(tmesh, p, planarity_tol=1e-3)
    p = tp.copy(); p[i, d] -= 1e-6; fm = enclosed_volume(tmesh, p, planarity_tol=1e-3)
    numf[d] = (fp - fm) / 2e-6
allok &= report("open-mesh total volume grad", full[i], numf)

print("ALL OK" if allok else "SOMETHING FAILED")
