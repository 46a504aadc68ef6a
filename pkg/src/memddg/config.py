"""Line-oriented run configuration: ``key = value`` rows under ``[section]``
headers, deserializing to a :class:`~memddg.presets.ScenarioPreset`.

A bare ``preset = <name>`` row pulls a catalog entry; any later row overrides
one key of it.  Unknown keys, malformed values and invariant violations all
raise with the offending file line.  Floats are emitted with ``repr`` so a
write→parse→write cycle is byte-identical.
"""
from __future__ import annotations

from dataclasses import fields, replace

from .parameters import (
    BoundaryCondition,
    MembraneParameters,
    ParameterError,
    RegularizationWeights,
    RemeshConfig,
    ReservoirSpec,
    SolverConfig,
)
from .presets import ProteinInit, ScenarioPreset, UnknownPreset, make_preset

__all__ = [
    "ConfigError",
    "UnknownKey",
    "MissingRequired",
    "ConfigTypeError",
    "parse_config",
    "write_config",
    "loads_config",
    "dumps_config",
]


class ConfigError(ValueError):
    """Configuration file problem; message names the file line."""


class UnknownKey(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class ConfigTypeError(ConfigError, TypeError):
    """Value failed type conversion or violated a parameter invariant."""


_AXES = {"x": 0, "y": 1, "z": 2}
_AXIS_NAMES = {0: "x", 1: "y", 2: "z"}

# Value codecs: (parse str -> value, format value -> str).


def _parse_float(s: str) -> float:
    return float(s)


def _parse_optfloat(s: str):
    return None if s == "none" else float(s)


def _parse_int(s: str) -> int:
    return int(s)


def _parse_bool(s: str) -> bool:
    if s in ("true", "false"):
        return s == "true"
    raise ValueError(f"expected true/false, got {s!r}")


def _parse_str(s: str) -> str:
    return s.strip("\"'")


def _parse_vec3(s: str) -> tuple:
    parts = s.split()
    if len(parts) != 3:
        raise ValueError(f"expected 3 numbers, got {len(parts)}")
    return tuple(float(p) for p in parts)


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    return str(value)


_PARSERS = {
    "float": _parse_float,
    "optfloat": _parse_optfloat,
    "int": _parse_int,
    "bool": _parse_bool,
    "str": _parse_str,
    "vec3": _parse_vec3,
}

# Section schemas: key -> declared type.  Dataclass-backed sections reuse the
# dataclass field list so the config vocabulary cannot drift from the code.
_TOP_KEYS = {
    "preset": "str",
    "name": "str",
    "generator": "str",
    "run_mode": "str",
    "duration": "float",
    "normalize_area": "bool",
}
_GENERATOR_KEYS = {
    "subdivisions": "int",
    "rings": "int",
    "n_circumference": "int",
    "n_axial": "int",
    "radius": "float",
    "a": "float",
    "c": "float",
    "length": "float",
    "target_edge_length": "float",
}
_PROTEIN_KEYS = {
    "kind": "str",
    "value": "float",
    "center": "vec3",
    "radius": "float",
    "sharpness": "float",
    "noise": "float",
    "seed": "int",
}


def _dataclass_schema(cls) -> dict:
    type_map = {"float": "float", "int": "int", "bool": "bool"}
    out = {}
    for f in fields(cls):
        if f.name.startswith("_"):
            continue
        if f.type in ("float | None", "int | None"):
            out[f.name] = "optfloat"
        elif f.type in type_map:
            out[f.name] = type_map[f.type]
        else:
            out[f.name] = "float"
    return out


_PARAMS_KEYS = _dataclass_schema(MembraneParameters)
_RESERVOIR_KEYS = _dataclass_schema(ReservoirSpec)
_SOLVER_KEYS = _dataclass_schema(SolverConfig)
_REMESH_KEYS = _dataclass_schema(RemeshConfig)
_REG_KEYS = _dataclass_schema(RegularizationWeights)

_SECTIONS = {
    "": _TOP_KEYS,
    "generator": _GENERATOR_KEYS,
    "params": _PARAMS_KEYS,
    "protein": _PROTEIN_KEYS,
    "boundary": None,  # loopN / loopN_phi keys, validated separately
    "reservoir": _RESERVOIR_KEYS,
    "solver": _SOLVER_KEYS,
    "remesh": _REMESH_KEYS,
    "regularization": _REG_KEYS,
}


def _where(path: str, lineno: int) -> str:
    return f"{path}:{lineno}"


def loads_config(text: str, path: str = "<config>") -> ScenarioPreset:
    """Parse configuration text; see :func:`parse_config` for the contract."""
    # Pass 1: tokenize into (section, key, raw value, lineno).
    rows: list[tuple[str, str, str, int]] = []
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS or section == "":
                raise UnknownKey(f"{_where(path, lineno)}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(
                f"{_where(path, lineno)}: expected 'key = value', got {line!r}"
            )
        key, _, value = line.partition("=")
        rows.append((section, key.strip(), value.strip(), lineno))

    # Pass 2: start from the referenced preset (or a blank scenario) and
    # collect typed updates per section.
    base: ScenarioPreset | None = None
    for sec, key, value, lineno in rows:
        if sec == "" and key == "preset":
            try:
                base = make_preset(_parse_str(value))
            except UnknownPreset as exc:
                raise ConfigError(f"{_where(path, lineno)}: {exc.args[0]}") from None
    explicit_preset = base is not None
    if base is None:
        base = ScenarioPreset(
            name="custom",
            generator="icosphere",
            generator_args={"subdivisions": 2},
            params=MembraneParameters(),
            run_mode="dynamics",
        )

    updates: dict[str, dict] = {s: {} for s in _SECTIONS}
    lines_of: dict[tuple[str, str], int] = {}
    boundary_rows: list[tuple[str, str, int]] = []
    saw = {"generator": False, "reservoir": False, "boundary": False}
    for sec, key, value, lineno in rows:
        if sec == "" and key == "preset":
            continue
        if sec == "boundary":
            boundary_rows.append((key, value, lineno))
            saw["boundary"] = True
            continue
        schema = _SECTIONS[sec]
        if key not in schema:
            raise UnknownKey(
                f"{_where(path, lineno)}: unknown key {key!r} in section [{sec or 'top'}]"
            )
        try:
            parsed = _PARSERS[schema[key]](value)
        except ValueError as exc:
            raise ConfigTypeError(
                f"{_where(path, lineno)}: {key}: {exc}"
            ) from None
        updates[sec][key] = parsed
        lines_of[(sec, key)] = lineno
        if sec in saw:
            saw[sec] = True

    def rebuild(obj, sec: str):
        """dataclasses.replace with invariant errors mapped to file lines."""
        if not updates[sec]:
            return obj
        try:
            return replace(obj, **updates[sec])
        except ParameterError as exc:
            msg = str(exc)
            lineno = next(
                (lines_of[(sec, k)] for k in updates[sec] if msg.startswith(k)),
                min(lines_of[(sec, k)] for k in updates[sec]),
            )
            raise ConfigTypeError(f"{_where(path, lineno)}: {msg}") from None

    params = rebuild(base.params, "params")
    protein = rebuild(base.protein, "protein")
    solver = rebuild(base.solver, "solver")
    remesh = rebuild(base.remesh, "remesh")
    regularization = rebuild(base.regularization, "regularization")

    if saw["reservoir"]:
        reservoir = rebuild(base.reservoir or ReservoirSpec(), "reservoir")
    else:
        reservoir = base.reservoir
    if saw["generator"]:
        generator_args = dict(base.generator_args)
        generator_args.update(updates["generator"])
        # Switching generators drops the old argument set entirely.
        if "generator" in updates[""] and updates[""]["generator"] != base.generator:
            generator_args = dict(updates["generator"])
    else:
        generator_args = dict(base.generator_args)
        if "generator" in updates[""] and updates[""]["generator"] != base.generator:
            generator_args = {}

    boundary = _build_boundary(base.boundary, boundary_rows, path) if saw["boundary"] else base.boundary

    top = updates[""]
    if not explicit_preset and "generator" not in top:
        raise MissingRequired(f"{path}: a 'preset' or 'generator' key is required")
    try:
        preset = replace(
            base,
            name=top.get("name", base.name),
            generator=top.get("generator", base.generator),
            generator_args=generator_args,
            run_mode=top.get("run_mode", base.run_mode),
            duration=top.get("duration", base.duration),
            normalize_area=top.get("normalize_area", base.normalize_area),
            params=params,
            protein=protein,
            boundary=boundary,
            reservoir=reservoir,
            solver=solver,
            remesh=remesh,
            regularization=regularization,
        )
    except ValueError as exc:  # run_mode / protein-kind enums
        raise ConfigTypeError(f"{path}: {exc}") from None
    return preset


def _build_boundary(base: tuple, rows: list, path: str) -> tuple:
    """loopN = kind [axis], loopN_phi = value rows -> BoundaryCondition tuple."""
    kinds: dict[int, tuple] = {}
    phis: dict[int, tuple] = {}
    for key, value, lineno in rows:
        name, _, suffix = key.partition("_")
        if not name.startswith("loop") or not name[4:].isdigit() or suffix not in ("", "phi"):
            raise UnknownKey(
                f"{_where(path, lineno)}: unknown key {key!r} in section [boundary]"
            )
        n = int(name[4:])
        if suffix == "phi":
            try:
                phis[n] = (float(value), lineno)
            except ValueError:
                raise ConfigTypeError(f"{_where(path, lineno)}: {key}: not a number")
        else:
            tokens = value.split()
            axis = None
            if len(tokens) == 2:
                if tokens[1] not in _AXES:
                    raise ConfigTypeError(
                        f"{_where(path, lineno)}: axis must be x, y or z"
                    )
                axis = _AXES[tokens[1]]
            elif len(tokens) != 1:
                raise ConfigTypeError(
                    f"{_where(path, lineno)}: expected 'kind [axis]', got {value!r}"
                )
            kinds[n] = (tokens[0], axis, lineno)

    count = max(list(kinds) + list(phis), default=-1) + 1
    out = []
    for n in range(count):
        if n in kinds:
            kind, axis, lineno = kinds[n]
        elif n < len(base):
            kind, axis, lineno = base[n].kind, base[n].axis, 0
        else:
            missing_line = min(v[-1] for v in list(kinds.values()) + list(phis.values()))
            raise MissingRequired(
                f"{_where(path, missing_line)}: boundary loop{n} is not configured "
                f"but a higher-numbered loop is"
            )
        phi_value = phis[n][0] if n in phis else (base[n].phi_value if n < len(base) else None)
        try:
            out.append(BoundaryCondition(kind=kind, axis=axis, phi_value=phi_value))
        except ParameterError as exc:
            raise ConfigTypeError(f"{_where(path, lineno)}: {exc}") from None
    return tuple(out)


def parse_config(path: str) -> ScenarioPreset:
    """Read and validate a configuration file.

    Raises UnknownKey / ConfigTypeError / MissingRequired, each naming the
    offending ``file:line``.
    """
    with open(path, "r", encoding="utf-8") as f:
        return loads_config(f.read(), path=path)


def dumps_config(preset: ScenarioPreset) -> str:
    """Canonical full serialization; parsing it reproduces ``preset`` exactly."""
    out = [
        f"name = {preset.name}",
        f"generator = {preset.generator}",
        f"run_mode = {preset.run_mode}",
        f"duration = {_fmt(preset.duration)}",
        f"normalize_area = {_fmt(preset.normalize_area)}",
        "",
        "[generator]",
    ]
    for key in sorted(preset.generator_args):
        out.append(f"{key} = {_fmt(preset.generator_args[key])}")

    def emit_section(header: str, obj) -> None:
        out.append("")
        out.append(f"[{header}]")
        for f in fields(obj):
            if f.name.startswith("_"):
                continue
            out.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")

    emit_section("params", preset.params)
    emit_section("protein", preset.protein)
    if preset.boundary:
        out.append("")
        out.append("[boundary]")
        for n, bc in enumerate(preset.boundary):
            row = bc.kind if bc.axis is None else f"{bc.kind} {_AXIS_NAMES[bc.axis]}"
            out.append(f"loop{n} = {row}")
            if bc.phi_value is not None:
                out.append(f"loop{n}_phi = {_fmt(bc.phi_value)}")
    if preset.reservoir is not None:
        emit_section("reservoir", preset.reservoir)
    emit_section("solver", preset.solver)
    emit_section("remesh", preset.remesh)
    emit_section("regularization", preset.regularization)
    return "\n".join(out) + "\n"


def write_config(path: str, preset: ScenarioPreset) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_config(preset))
