"""Config assembly: YAML files, gain presets, CLI overrides.

A config document has four optional top-level sections: ``sim``,
``swarm``, ``gains`` (with ``olfati_saber`` / ``vasarhelyi`` subsections)
and ``quad``.  Anything omitted falls back to the packaged defaults, so
a config file only states what it changes.  Unknown keys are rejected
rather than ignored; a typo should fail loudly, not silently simulate
the wrong thing.

Two gain values track swarm parameters unless pinned explicitly:
``vasarhelyi.r0_rep`` follows d_ref and ``vasarhelyi.v_flock`` follows
v_ref (a null in the file means "track").
"""

from __future__ import annotations

from dataclasses import fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml

from .core import MapConfig, SimConfig, SpawnVolume, SwarmParams, Vec3, validate_config
from .dynamics import QuadParams
from .flocking import OlfatiSaberGains, VasarhelyiGains


class ConfigError(ValueError):
    """Invalid or malformed configuration; message lists every problem."""


def _update_dataclass(obj, data: dict, where: str):
    """Overlay dict keys onto a dataclass instance, rejecting unknown names."""
    valid = {f.name for f in fields(obj)}
    for key, value in data.items():
        if key not in valid:
            raise ConfigError(f"unknown key {key!r} in section {where!r}")
        setattr(obj, key, value)
    return obj


def gains_preset(algorithm: str) -> dict:
    """Load the shipped gain preset for one algorithm as a plain dict."""
    name = f"{algorithm}.yaml"
    try:
        text = (resources.files("swarmsim") / "presets" / name).read_text()
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise ConfigError(f"no gain preset for algorithm {algorithm!r}") from exc
    doc = yaml.safe_load(text) or {}
    return doc.get("gains", {})


def builtin_scenarios() -> list[str]:
    """Names of the config files shipped inside the package."""
    root = resources.files("swarmsim") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def _scenario_text(name: str) -> Optional[str]:
    candidate = resources.files("swarmsim") / "scenarios" / f"{name}.yaml"
    try:
        return candidate.read_text()
    except (FileNotFoundError, IsADirectoryError):
        return None


def from_dict(doc: dict) -> tuple[SimConfig, SwarmParams, QuadParams]:
    """Build validated config objects from a parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    known = {"sim", "swarm", "gains", "quad"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown top-level section {key!r}")

    sim_doc = dict(doc.get("sim") or {})
    swarm_doc = dict(doc.get("swarm") or {})
    gains_doc = dict(doc.get("gains") or {})
    quad_doc = dict(doc.get("quad") or {})

    cfg = SimConfig()
    spawn_doc = sim_doc.pop("spawn", None)
    map_doc = sim_doc.pop("map", None)
    _update_dataclass(cfg, sim_doc, "sim")
    if spawn_doc is not None:
        center = spawn_doc.get("center")
        edge = spawn_doc.get("edge", SpawnVolume.edge)
        unknown = set(spawn_doc) - {"center", "edge"}
        if unknown:
            raise ConfigError(f"unknown key(s) {sorted(unknown)} in sim.spawn")
        cfg.spawn = SpawnVolume(
            center=Vec3(*center) if center is not None else SpawnVolume.center,
            edge=float(edge),
        )
    if map_doc is not None:
        mc = MapConfig()
        map_doc = dict(map_doc)             # keep the caller's document intact
        bounds = map_doc.pop("bounds", None)
        _update_dataclass(mc, map_doc, "sim.map")
        if bounds is not None:
            (n0, e0), (n1, e1) = bounds
            mc.bounds_min = (float(n0), float(e0))
            mc.bounds_max = (float(n1), float(e1))
        if mc.radius_range is not None:
            mc.radius_range = tuple(float(r) for r in mc.radius_range)
        cfg.map = mc

    sp = SwarmParams()
    u_mig = swarm_doc.pop("u_mig", None)
    _update_dataclass(sp, swarm_doc, "swarm")
    if u_mig is not None:
        sp.u_mig = Vec3(*u_mig)

    for section, klass, attr in (
        ("olfati_saber", OlfatiSaberGains, "gains_olfati_saber"),
        ("vasarhelyi", VasarhelyiGains, "gains_vasarhelyi"),
    ):
        merged = dict(gains_preset(section))
        user = gains_doc.pop(section, None)
        if user:
            merged.update(user)
        # null means "track the swarm-level parameter"
        if merged.get("r0_rep", 0) is None:
            merged["r0_rep"] = sp.d_ref
        if merged.get("v_flock", 0) is None:
            merged["v_flock"] = sp.v_ref
        merged = {k: v for k, v in merged.items() if v is not None}
        setattr(sp, attr, _update_dataclass(klass(), merged, f"gains.{section}"))
    if gains_doc:
        raise ConfigError(f"unknown gains section(s) {sorted(gains_doc)}")

    qp = QuadParams()
    _update_dataclass(qp, quad_doc, "quad")

    report = validate_config(cfg, sp)
    problems = list(report.violations) + qp.violations()
    if problems:
        raise ConfigError("invalid config: " + "; ".join(problems))
    return cfg, sp, qp


def load_config(source: Optional[str]) -> tuple[SimConfig, SwarmParams, QuadParams]:
    """Load a config file, a builtin scenario name, or pure defaults (None)."""
    if source is None:
        return from_dict({})
    path = Path(source)
    if path.exists():
        text = path.read_text()
    else:
        text = _scenario_text(str(source))
        if text is None:
            raise ConfigError(
                f"config {source!r} is neither a file nor a builtin scenario "
                f"(builtins: {', '.join(builtin_scenarios())})"
            )
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config: {exc}") from exc
    return from_dict(doc)


def apply_overrides(cfg: SimConfig, sp: SwarmParams, qp: QuadParams,
                    **overrides) -> tuple[SimConfig, SwarmParams, QuadParams]:
    """Apply CLI-style overrides on top of loaded config; None values skip.

    Re-validates afterward, so an override can invalidate a config and
    fail the same way a bad file does.
    """
    mapping = {
        "algorithm": (sp, "algorithm"),
        "agents": (sp, "n_agents"),
        "neighbor_mode": (sp, "neighbor_mode"),
        "radius": (sp, "radius"),
        "nn": (sp, "nn"),
        "seed": (cfg, "rng_seed"),
        "dt": (cfg, "dt"),
        "t_end": (cfg, "t_end"),
        "dynamics": (cfg, "dynamics_mode"),
        "out_dir": (cfg, "out_dir"),
    }
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "map_density":
            cfg.map.density = float(value)
            if value > 0:
                cfg.map.enabled = True
        elif key in mapping:
            target, attr = mapping[key]
            setattr(target, attr, value)
        else:
            raise ConfigError(f"unknown override {key!r}")
    report = validate_config(cfg, sp)
    problems = list(report.violations) + qp.violations()
    if problems:
        raise ConfigError("invalid config: " + "; ".join(problems))
    return cfg, sp, qp


# ---------------------------------------------------------------------------
# Serialization (run-record echo and round-tripping)


def _vec(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def to_dict(cfg: SimConfig, sp: SwarmParams, qp: QuadParams) -> dict:
    """Full explicit document: loading it back reproduces the same objects."""
    doc: dict[str, Any] = {
        "sim": {
            "dt": cfg.dt,
            "t_end": cfg.t_end,
            "rng_seed": cfg.rng_seed,
            "dynamics_mode": cfg.dynamics_mode,
            "spawn": {"center": _vec(cfg.spawn.center), "edge": cfg.spawn.edge},
            "map": {
                "enabled": cfg.map.enabled,
                "bounds": [list(cfg.map.bounds_min), list(cfg.map.bounds_max)],
                "density": cfg.map.density,
                "radius_range": list(cfg.map.radius_range),
                "file": cfg.map.file,
            },
            "out_dir": cfg.out_dir,
            "metrics_stride": cfg.metrics_stride,
            "state_stride": cfg.state_stride,
        },
        "swarm": {
            "n_agents": sp.n_agents,
            "algorithm": sp.algorithm,
            "neighbor_mode": sp.neighbor_mode,
            "radius": sp.radius,
            "nn": sp.nn,
            "d_ref": sp.d_ref,
            "v_ref": sp.v_ref,
            "u_mig": _vec(sp.u_mig),
            "r_coll": sp.r_coll,
            "v_max": sp.v_max,
            "a_max": sp.a_max,
            "migration": sp.migration,
        },
        "gains": {
            "olfati_saber": {f.name: getattr(sp.gains_olfati_saber, f.name)
                             for f in fields(OlfatiSaberGains)},
            "vasarhelyi": {f.name: getattr(sp.gains_vasarhelyi, f.name)
                           for f in fields(VasarhelyiGains)},
        },
        "quad": {f.name: getattr(qp, f.name) for f in fields(QuadParams)},
    }
    return doc
