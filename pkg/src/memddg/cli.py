"""Command-line front end.

Subcommands
-----------
generate    realize a scenario's starting mesh and write it to PLY/OBJ
energy      print the energy breakdown of a scenario's starting state
forces      print per-term force summaries, optionally dump per-vertex rows
run         execute a scenario and write a trajectory plus a scalar CSV
minimize    same, but force the gradient minimizer regardless of run mode
gradcheck   Taylor exactness sweep of forces and potentials, CSV output
benchmark   spheroid convergence study, CSV output
info        validate a mesh (from file or scenario) and print a summary

All numeric output uses repr() floats with '.' decimals, so identical input
produces byte-identical files. Errors leave a single line on stderr in the
form ``error: <Kind>: <message>`` and a nonzero exit code.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, dumps_config, parse_config
from .driver import run_preset
from .energy import total_energy
from .forces import force_breakdown
from .geometry import measure, mesh_statistics
from .halfedge import MeshError
from .meshgen import InvalidParams
from .meshio import ParseError, UnknownFormat, read_mesh, write_mesh
from .presets import UnknownPreset, make_preset, preset_names, realize
from .solvers import ScalarRecord
from .trajectory import TrajectoryError, TrajectoryWriter
from .validation import (
    ReferenceMismatch,
    spheroid_convergence_study,
    taylor_exactness_study,
    write_taylor_csv,
)

_ERRORS = (
    ConfigError,
    ParseError,
    UnknownFormat,
    MeshError,
    InvalidParams,
    UnknownPreset,
    TrajectoryError,
    ReferenceMismatch,
    OSError,
    ValueError,
    KeyError,
)


def _load_preset(args):
    if getattr(args, "config", None):
        return parse_config(args.config)
    if getattr(args, "preset", None):
        return make_preset(args.preset)
    raise ValueError(
        f"need --preset (one of: {', '.join(preset_names())}) or --config"
    )


def _resolve_threads(args) -> int:
    n = args.threads
    if n is None:
        n = int(os.environ.get("MEMDDG_THREADS", "1"))
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    # forwarded to the BLAS pools; all reductions here are fixed-order, so
    # results do not depend on this
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))
    return n


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text)


# -- subcommands --------------------------------------------------------


def _cmd_generate(args) -> int:
    preset = _load_preset(args)
    if not args.out:
        raise ValueError("generate needs --out FILE.ply or FILE.obj")
    mesh, state, _ = realize(preset)
    phi = state.phi if np.any(state.phi != 0.0) else None
    if Path(args.out).suffix.lower() == ".obj":
        phi = None  # OBJ carries no vertex scalars
    write_mesh(args.out, mesh, state.positions, phi=phi)
    _say(args, f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_faces} faces")
    return 0


def _cmd_energy(args) -> int:
    preset = _load_preset(args)
    mesh, state, system = realize(preset)
    br = total_energy(state, mesh, system.params, system.reservoir)
    for term in ("E_b", "E_s", "E_p", "E_d", "E_a"):
        print(f"{term} = {getattr(br, term)!r}")
    print(f"total = {br.total!r}")
    if args.out:
        m = measure(mesh, state.positions)
        from .curvature import vertex_mean_curvature

        h = vertex_mean_curvature(mesh, m) / m.vertex_dual_area
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", "x", "y", "z", "dual_area", "H", "phi"])
            for i in range(mesh.n_vertices):
                w.writerow(
                    [i]
                    + [repr(float(v)) for v in state.positions[i]]
                    + [repr(float(m.vertex_dual_area[i])), repr(float(h[i])), repr(float(state.phi[i]))]
                )
        _say(args, f"wrote {args.out}")
    return 0


_FORCE_TERMS = ("f_b", "f_s", "f_p", "f_d", "f_a", "f_reg", "f_ext")


def _cmd_forces(args) -> int:
    preset = _load_preset(args)
    mesh, state, system = realize(preset)
    fb = force_breakdown(
        state, mesh, system.params, system.reservoir,
        reg_reference=system.reg_reference, reg_weights=system.reg_weights,
        f_ext=system.f_ext,
    )
    total = np.zeros((mesh.n_vertices, 3))
    for term in _FORCE_TERMS:
        f = getattr(fb, term)
        total += f
        norms = np.linalg.norm(f, axis=1)
        net = np.linalg.norm(f.sum(axis=0))
        print(f"{term}: max |f| = {norms.max():.6e}   net = {net:.3e}")
    print(f"total: max |f| = {np.linalg.norm(total, axis=1).max():.6e}   "
          f"net = {np.linalg.norm(total.sum(axis=0)):.3e}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["vertex"]
            for term in _FORCE_TERMS + ("total",):
                header += [f"{term}_{ax}" for ax in "xyz"]
            w.writerow(header)
            for i in range(mesh.n_vertices):
                row = [i]
                for term in _FORCE_TERMS:
                    row += [repr(float(v)) for v in getattr(fb, term)[i]]
                row += [repr(float(v)) for v in total[i]]
                w.writerow(row)
        _say(args, f"wrote {args.out}")
    return 0


def _scalar_csv(path, records: list[ScalarRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["step", "time", "E_b", "E_s", "E_p", "E_d", "E_a", "E_total",
             "residual_mech", "residual_chem", "area", "volume", "phi_min", "phi_max"]
        )
        for r in records:
            w.writerow(
                [r.step, repr(float(r.time))]
                + [repr(float(getattr(r.energy, t))) for t in ("E_b", "E_s", "E_p", "E_d", "E_a")]
                + [repr(float(r.energy.total)), repr(float(r.residual_mech)),
                   repr(float(r.residual_chem)), repr(float(r.area)),
                   repr(float(r.volume)), repr(float(r.phi_min)), repr(float(r.phi_max))]
            )


def _execute(args, preset) -> int:
    if args.seed is not None and preset.protein.noise > 0.0:
        preset = dataclasses.replace(
            preset, protein=dataclasses.replace(preset.protein, seed=args.seed)
        )
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    name = preset.name or "run"
    traj_path = out / f"{name}.traj.gz"
    mut_name = f"{name}-mutations.json" if preset.solver.remesh_period > 0 else None

    with TrajectoryWriter(
        traj_path, config_echo=dumps_config(preset), mutation_log_ref=mut_name
    ) as tw:
        def sink(t, mesh, st):
            tw.append(t, mesh.faces, st.positions, phi=st.phi)

        result = run_preset(preset, sink=sink)

    _scalar_csv(out / f"{name}-scalars.csv", result.records)
    if mut_name is not None:
        (out / mut_name).write_text(result.mutations.to_json())
    rep = result.report
    _say(args, f"{name}: {rep.reason} after {rep.steps} steps "
               f"(t = {result.state.time:.6g}, residual = {rep.residual:.3e}, "
               f"wall = {rep.wall_time:.1f}s)")
    _say(args, f"wrote {traj_path} and {out / f'{name}-scalars.csv'}")
    return 0


def _cmd_run(args) -> int:
    return _execute(args, _load_preset(args))


def _cmd_minimize(args) -> int:
    preset = dataclasses.replace(_load_preset(args), run_mode="minimize")
    return _execute(args, preset)


def _cmd_gradcheck(args) -> int:
    preset = _load_preset(args)
    mesh, state, system = realize(preset)
    # keep the sweep inside the open interval: the clamped protein laws are
    # only differentiable away from 0 and 1
    phi = np.clip(state.phi, 0.05, 0.95)
    mask = None
    if system.bcs is not None:
        from .boundary import build_masks

        mask, _, _ = build_masks(mesh, system.bcs)
    report = taylor_exactness_study(
        mesh, state.positions, phi, system.params,
        reservoir=system.reservoir, seed=args.seed or 0, mask=mask,
    )
    path = args.out or "gradcheck.csv"
    write_taylor_csv(path, report)
    _say(args, report.summary())
    _say(args, f"wrote {path}")
    if args.strict:
        bad = [
            t for t, row in report.rows.items()
            if not row.machine_exact and (row.order is None or row.order < 1.9)
        ]
        if bad:
            print(f"error: GradcheckFailure: fitted order below 1.9 for {','.join(bad)}",
                  file=sys.stderr)
            return 1
    return 0


def _cmd_benchmark(args) -> int:
    levels = args.levels
    if levels < 3:
        raise ValueError("benchmark needs --levels >= 3")
    subdivisions = tuple(range(max(1, levels - 3), levels + 1))
    report = spheroid_convergence_study(subdivisions)
    path = args.out or "benchmark.csv"
    report.to_csv(path)
    _say(args, report.summary())
    _say(args, f"wrote {path}")
    if args.strict:
        bad = []
        for n, row in report.rows.items():
            if row.kind in ("global", "local") and (row.slope is None or row.slope < 1.7):
                bad.append(n)
            if row.kind == "vector" and (row.slope is None or row.slope < 1.3):
                bad.append(n)
        if bad:
            print(f"error: BenchmarkFailure: slope below gate for {','.join(bad)}",
                  file=sys.stderr)
            return 1
    return 0


def _cmd_info(args) -> int:
    if args.mesh:
        mesh, positions, phi = read_mesh(args.mesh)
        source = args.mesh
    else:
        preset = _load_preset(args)
        mesh, state, _ = realize(preset)
        positions, phi = state.positions, state.phi
        source = preset.name
    stats = mesh_statistics(mesh, positions)
    print(f"mesh: {source}")
    for k, v in stats.items():
        print(f"  {k} = {v}")
    if phi is not None and np.any(phi != 0.0):
        print(f"  phi range = [{phi.min():.6g}, {phi.max():.6g}]")
    from .geometry import face_aspect_ratio

    ratio = face_aspect_ratio(measure(mesh, positions), mesh)
    edges = [1.0, 1.2, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0, np.inf]
    counts, _ = np.histogram(ratio[np.isfinite(ratio)], bins=edges)
    print("  aspect-ratio histogram:")
    for lo, hi, n in zip(edges[:-1], edges[1:], counts):
        tag = f"{lo:g}-{hi:g}" if np.isfinite(hi) else f">{lo:g}"
        bar = "#" * min(60, int(round(60 * n / max(1, mesh.n_faces))))
        print(f"    {tag:>8s} {n:6d} {bar}")
    return 0


# -- entry point --------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="memddg", description=__doc__.split("\n")[0])
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, *, levels=False, strict=False, mesh_arg=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="run configuration file")
        p.add_argument("--preset", help="named scenario from the catalog")
        p.add_argument("--out", help="output file or directory")
        p.add_argument("--seed", type=int, help="RNG seed override")
        p.add_argument("--threads", type=int, help="BLAS thread count "
                       "(default: MEMDDG_THREADS or 1)")
        p.add_argument("--quiet", action="store_true", help="suppress progress text")
        if levels:
            p.add_argument("--levels", type=int, default=5,
                           help="finest subdivision level (default 5)")
        if strict:
            p.add_argument("--strict", action="store_true",
                           help="nonzero exit when a rate gate fails")
        if mesh_arg:
            p.add_argument("mesh", nargs="?", help="mesh file (PLY/OBJ)")
        p.set_defaults(fn=fn)
        return p

    add("generate", _cmd_generate, "write a scenario's starting mesh")
    add("energy", _cmd_energy, "print the energy breakdown")
    add("forces", _cmd_forces, "print force summaries, optionally dump per vertex")
    add("run", _cmd_run, "execute a scenario, writing trajectory + scalars")
    add("minimize", _cmd_minimize, "gradient-minimize a scenario")
    add("gradcheck", _cmd_gradcheck, "Taylor exactness sweep to CSV", strict=True)
    add("benchmark", _cmd_benchmark, "spheroid convergence study to CSV",
        levels=True, strict=True)
    add("info", _cmd_info, "validate and summarize a mesh", mesh_arg=True)
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _resolve_threads(args)
        return args.fn(args)
    except _ERRORS as e:
        msg = str(e).replace("\n", " ")
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
