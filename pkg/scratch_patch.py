import sys
import time
from dataclasses import replace as drep

import numpy as np

sys.path.insert(0, "src")
from memddg.driver import run_dynamics
from memddg.parameters import RegularizationWeights, RemeshConfig, SolverConfig
from memddg.presets import make_preset, realize

name = sys.argv[1]
lam = float(sys.argv[2])
tend = float(sys.argv[3])
chunk = float(sys.argv[4]) if len(sys.argv) > 4 else 4000.0

p = make_preset(name)
p = drep(
    p,
    generator_args={"radius": 1.0, "rings": 10},
    protein=drep(p.protein, sharpness=15.0),
    params=drep(p.params, lambda_fixed=lam),
    regularization=RegularizationWeights(K_c=1e-4),
    solver=drep(
        p.solver,
        dt_init=0.1,
        max_steps=20000,
        remesh_period=100,
        tolerance=1e-6,
    ),
    remesh=RemeshConfig(),
    duration=tend,
)
mesh, state, system = realize(p)
t0 = time.time()
total_steps = 0
t_target = 0.0
while t_target < tend:
    t_target = min(t_target + chunk, tend)
    res = run_dynamics(
        state, system, p.solver, mode="dynamics", duration=t_target, preset=p
    )
    state, system = res.state, res.system
    total_steps += res.report.steps
    h = float(np.abs(state.positions[:, 2]).max())
    print(
        f"{name} lam={lam:g} t={state.time:.0f} steps={total_steps}"
        f" wall={time.time()-t0:.0f}s h={h:.4f} V={system.mesh.n_vertices}"
        f" muts={len(res.mutations)} res={res.report.residual:.2e}",
        flush=True,
    )
    if res.report.residual <= p.solver.tolerance:
        print(f"{name} equilibrated", flush=True)
        break
print(
    f"FINAL {name} lam={lam:g} h={float(np.abs(state.positions[:,2]).max()):.4f}",
    flush=True,
)
