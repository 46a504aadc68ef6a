import time

import numpy as np

from memddg.halfedge import HalfedgeMesh
from memddg.meshgen import icosphere
from memddg.parameters import RemeshConfig
from memddg.remesh import (
    EditableMesh,
    MutationLog,
    remesh_pass,
    replay_mutations,
    vertex_shift,
)
from memddg.state import SystemState

rng = np.random.default_rng(0)

# --- 1. single-op Euler accounting on icosphere -------------------------
mesh, pos = icosphere(2)
phi = rng.uniform(0.2, 0.8, mesh.n_vertices)
em = EditableMesh(mesh, pos, phi)
v0, e0, f0 = em.counts()
assert em.counts() == em.recount()
print("start counts:", (v0, e0, f0), "chi:", v0 - e0 + f0)

u, v = em.edges()[10]
assert em.try_flip(u, v)
assert em.counts() == (v0, e0, f0) == em.recount()

u, v = em.edges()[40]
assert em.try_split(u, v)
assert em.counts() == (v0 + 1, e0 + 3, f0 + 2) == em.recount()

u, v = em.edges()[5]
ok = em.try_collapse(u, v)
print("collapse ok:", ok, "counts:", em.counts())
assert em.counts() == (v0, e0, f0) == em.recount()

m2, p2, phi2, remap = em.finalize()
m2.validate()
print("finalize+validate ok, V,E,F:", m2.n_vertices, m2.n_edges, m2.n_faces)


def sample_edge(em, rng):
    """Random alive (u, v) edge via random alive face."""
    while True:
        fi = int(rng.integers(len(em.faces)))
        if em.face_alive[fi]:
            c = int(rng.integers(3))
            f = em.faces[fi]
            return f[c], f[(c + 1) % 3]


# --- 2. 10k randomized mutations on noisy sphere ------------------------
mesh, pos = icosphere(3)
pos = pos * (1.0 + 0.05 * rng.standard_normal((mesh.n_vertices, 1)))
phi = rng.uniform(0.2, 0.8, mesh.n_vertices)
em = EditableMesh(mesh, pos, phi)
t0 = time.perf_counter()
accepted = 0
attempts = 0
while accepted < 10_000:
    attempts += 1
    u, v = sample_edge(em, rng)
    op = ["flip", "collapse", "split"][int(rng.integers(3))]
    pre = em.counts()
    if op == "flip":
        ok = em.try_flip(u, v)
        want = pre
    elif op == "collapse":
        if pre[0] <= 8:
            continue
        ok = em.try_collapse(u, v)
        want = (pre[0] - 1, pre[1] - 3, pre[2] - 2)
    else:
        ok = em.try_split(u, v)
        want = (pre[0] + 1, pre[1] + 3, pre[2] + 2)
    if ok:
        accepted += 1
        post = em.counts()
        assert post == want, (op, pre, post, want)
        assert post[0] - post[1] + post[2] == 2, "Euler characteristic drifted"
dt = time.perf_counter() - t0
print(f"10000 mutations accepted ({attempts} attempts) in {dt:.1f}s")
assert em.counts() == em.recount()

m2, p2, phi2, remap = em.finalize()
m2.validate()
print("final mesh valid: V,E,F =", m2.n_vertices, m2.n_edges, m2.n_faces,
      "chi:", m2.euler_characteristic)
assert np.all(phi2 > 0) and np.all(phi2 < 1)

# --- 3. exact replay ----------------------------------------------------
t0 = time.perf_counter()
log_json = em.log.to_json()
log2 = MutationLog.from_json(log_json)
mesh3, pos3, phi3 = replay_mutations(mesh, pos, phi, log2)
dt = time.perf_counter() - t0
same_faces = np.array_equal(mesh3.faces, m2.faces)
same_pos = np.array_equal(pos3, p2)
same_phi = np.array_equal(phi3, phi2)
print(f"replay in {dt:.1f}s: faces identical {same_faces}, pos identical {same_pos}, "
      f"phi identical {same_phi}")
assert same_faces and same_pos and same_phi

# --- 4. remesh_pass behavior -------------------------------------------
# a single non-Delaunay diamond (long diagonal) flips exactly once
quad = HalfedgeMesh.from_faces(4, [[2, 3, 0], [3, 2, 1]])
p = np.array([[0.0, 0.05, 0.0], [0.0, -0.05, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
st = SystemState(positions=p, phi=np.zeros(4))
cfg = RemeshConfig(enable_collapse=False, enable_split=False, enable_shift=False)
m4, st4, log4 = remesh_pass(st, quad, cfg)
print("diamond flip ops:", log4.ops)
assert [o["op"] for o in log4.ops] == ["flip"]
em4 = EditableMesh(m4, st4.positions, st4.phi)
for uu, vv in em4.edges():
    assert em4.opposite_angle_sum(uu, vv) <= np.pi + 1e-10

# and the Delaunay orientation of the same quad is left alone
quad_ok = HalfedgeMesh.from_faces(4, [[0, 1, 2], [1, 0, 3]])
m4b, _, log4b = remesh_pass(SystemState(positions=p, phi=np.zeros(4)), quad_ok, cfg)
assert len(log4b.ops) == 0

# skinny triangle collapse
mesh5, pos5 = icosphere(2)
pos5 = pos5.copy()
nb = mesh5.vertex_neighbors(0)
pos5[0] = 0.97 * pos5[nb[0]] + 0.03 * pos5[0]
st5 = SystemState(positions=pos5, phi=np.zeros(mesh5.n_vertices))
cfg5 = RemeshConfig(enable_flip=False, enable_split=False, enable_shift=False)
m5, st5b, log5 = remesh_pass(st5, mesh5, cfg5)
print("skinny collapse ops:", [o["op"] for o in log5.ops])
assert any(o["op"] == "collapse" for o in log5.ops)

# curvature split: coarse sphere has |dihedral|/2 above a low threshold
mesh6, pos6 = icosphere(1)
st6 = SystemState(positions=pos6 * 1.0, phi=np.zeros(mesh6.n_vertices))
em6 = EditableMesh(mesh6, pos6, np.zeros(mesh6.n_vertices))
dens = [em6.edge_curvature_density(u, v) for u, v in em6.edges()]
print(f"sphere curvature density range: {min(dens):.3f} .. {max(dens):.3f}")
cfg6 = RemeshConfig(enable_flip=False, enable_collapse=False, enable_shift=False,
                    split_curvature=0.9 * min(dens))
m6, st6b, log6 = remesh_pass(st6, mesh6, cfg6)
n_split = sum(1 for o in log6.ops if o["op"] == "split")
print(f"sphere split count: {n_split} (V {mesh6.n_vertices} -> {m6.n_vertices})")
assert m6.n_vertices == mesh6.n_vertices + n_split
assert n_split > 0

# shift moves interior vertices (none on a closed sphere boundary-wise: all move)
ps = vertex_shift(mesh6, pos6)
print("vertex_shift changed interior:", not np.allclose(ps, pos6))

# protected vertices stay put through a full pass
prot = np.zeros(mesh5.n_vertices, dtype=bool)
prot[:12] = True
st7 = SystemState(positions=pos5.copy(), phi=np.zeros(mesh5.n_vertices))
m7, st7b, log7 = remesh_pass(st7, mesh5, RemeshConfig(), protected=prot)
print("protected pass ok, ops:", len(log7.ops))
print("ALL REMESH CHECKS PASSED")
