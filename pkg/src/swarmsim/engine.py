"""Simulation loop: spawn, sense, command, step, measure, record.

The update is synchronous: every command in a tick is computed from the
same snapshot of the swarm, so agent order never matters and runs are
reproducible bit for bit.  Time is derived from the integer tick index
(t = k * dt), never accumulated, so there is no drift.

Parameter patches are drained at tick boundaries only.  A patch stream
recorded from a live session can therefore be replayed through `run`
and reproduce the session's metric series exactly.
"""

from __future__ import annotations

import copy
import time
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from .config import ConfigError, to_dict
from .core import (RNG_KEY_SPAWN, AgentState, SimConfig, SwarmParams, Vec3,
                   substream, validate_config)
from .dynamics import (NumericBlowupError, QuadParams, rotation_body_to_inertial,
                       step_point_mass_arrays, step_quadcopter)
from .environment import ObstacleMap, generate_map, load_map
from .flocking import (OlfatiSaberGains, VasarhelyiGains, build_graph,
                       command_for, virtual_agents_for)
from .metrics import compute_frame
from .record import SCHEMA_VERSION, RunRecord, write_record


class SpawnError(RuntimeError):
    """Could not place all agents with the required separation."""


class PatchError(ValueError):
    """Parameter patch would violate a swarm invariant."""


_SPAWN_ATTEMPTS_PER_AGENT = 1000


def spawn_positions(cfg: SimConfig, sp: SwarmParams) -> np.ndarray:
    """Seeded uniform draws in the spawn cube, pairwise farther than 2*r_coll.

    Candidates violating the separation are redrawn; the attempt budget
    turns an overfull cube into an explicit error instead of a hang.
    """
    rng = substream(cfg.rng_seed, RNG_KEY_SPAWN)
    lo, hi = cfg.spawn.bounds()
    min_sep = 2.0 * sp.r_coll
    placed: list[np.ndarray] = []
    for k in range(sp.n_agents):
        for _ in range(_SPAWN_ATTEMPTS_PER_AGENT):
            c = rng.uniform(lo, hi)
            if all(float(np.linalg.norm(c - p)) > min_sep for p in placed):
                placed.append(c)
                break
        else:
            raise SpawnError(
                f"could not place agent {k + 1}/{sp.n_agents} at separation "
                f"{min_sep} m in a {cfg.spawn.edge} m cube"
            )
    return np.array(placed)


def spawn_swarm(cfg: SimConfig, sp: SwarmParams) -> list[AgentState]:
    """Initial states: seeded positions, zero velocity, level attitude."""
    return [AgentState.point_mass(Vec3.from_array(p))
            for p in spawn_positions(cfg, sp)]


_PATCH_FIELDS = {"apply_tick", "v_ref", "d_ref", "u_mig",
                 "gains_olfati_saber", "gains_vasarhelyi"}


@dataclass
class ParamPatch:
    """Mid-run change to the mutable swarm parameters.

    Applied at the start of the target tick, so the first commands that
    see it are the ones computed in that tick.  None fields are left
    untouched.  Gains updates are partial dicts merged onto the current
    gain block.
    """

    apply_tick: int = 0
    v_ref: Optional[float] = None
    d_ref: Optional[float] = None
    u_mig: Optional[Vec3] = None
    gains_olfati_saber: Optional[dict] = None
    gains_vasarhelyi: Optional[dict] = None

    def as_dict(self) -> dict:
        out: dict = {"apply_tick": self.apply_tick}
        if self.v_ref is not None:
            out["v_ref"] = self.v_ref
        if self.d_ref is not None:
            out["d_ref"] = self.d_ref
        if self.u_mig is not None:
            out["u_mig"] = [self.u_mig.x, self.u_mig.y, self.u_mig.z]
        if self.gains_olfati_saber:
            out["gains_olfati_saber"] = dict(self.gains_olfati_saber)
        if self.gains_vasarhelyi:
            out["gains_vasarhelyi"] = dict(self.gains_vasarhelyi)
        return out

    @staticmethod
    def from_dict(d: dict) -> "ParamPatch":
        # a silently ignored key would turn a typo into an acked no-op patch
        unknown = sorted(set(d) - _PATCH_FIELDS)
        if unknown:
            raise PatchError("unknown patch field(s): " + ", ".join(unknown))
        u_mig = d.get("u_mig")
        return ParamPatch(
            apply_tick=int(d.get("apply_tick", 0)),
            v_ref=d.get("v_ref"),
            d_ref=d.get("d_ref"),
            u_mig=Vec3(*u_mig) if u_mig is not None else None,
            gains_olfati_saber=d.get("gains_olfati_saber"),
            gains_vasarhelyi=d.get("gains_vasarhelyi"),
        )


def apply_patch(sp: SwarmParams, patch: ParamPatch) -> SwarmParams:
    """Return a patched copy of the swarm parameters, or raise PatchError.

    Gains that were tracking a swarm parameter keep tracking it: patching
    d_ref moves r0_rep along when the two were equal, likewise v_ref and
    v_flock.
    """
    new = copy.deepcopy(sp)
    if patch.d_ref is not None:
        if new.gains_vasarhelyi is not None and new.gains_vasarhelyi.r0_rep == new.d_ref:
            new.gains_vasarhelyi.r0_rep = float(patch.d_ref)
        new.d_ref = float(patch.d_ref)
    if patch.v_ref is not None:
        if new.gains_vasarhelyi is not None and new.gains_vasarhelyi.v_flock == new.v_ref:
            new.gains_vasarhelyi.v_flock = float(patch.v_ref)
        new.v_ref = float(patch.v_ref)
    if patch.u_mig is not None:
        new.u_mig = patch.u_mig if isinstance(patch.u_mig, Vec3) else Vec3(*patch.u_mig)
    for attr, updates, klass in (
        ("gains_olfati_saber", patch.gains_olfati_saber, OlfatiSaberGains),
        ("gains_vasarhelyi", patch.gains_vasarhelyi, VasarhelyiGains),
    ):
        if not updates:
            continue
        block = getattr(new, attr)
        valid = {f.name for f in fields(klass)}
        for key, value in updates.items():
            if key not in valid:
                raise PatchError(f"unknown gain {key!r} in {attr}")
            setattr(block, key, float(value))
    problems = new.violations()
    if problems:
        raise PatchError("; ".join(problems))
    return new


class World:
    """Owns the mutable simulation state and advances it tick by tick."""

    def __init__(self, cfg: SimConfig, sp: SwarmParams,
                 qp: Optional[QuadParams] = None,
                 patches: Sequence[ParamPatch] = ()):
        self.cfg = copy.deepcopy(cfg)
        self.sp = copy.deepcopy(sp)
        self.qp = copy.deepcopy(qp) if qp is not None else QuadParams()
        if self.sp.gains_olfati_saber is None:
            self.sp.gains_olfati_saber = OlfatiSaberGains()
        if self.sp.gains_vasarhelyi is None:
            self.sp.gains_vasarhelyi = VasarhelyiGains()
        report = validate_config(self.cfg, self.sp)
        problems = list(report.violations) + self.qp.violations()
        if problems:
            raise ConfigError("invalid config: " + "; ".join(problems))

        self.omap: Optional[ObstacleMap] = None
        if self.cfg.map.enabled:
            if self.cfg.map.file:
                self.omap = load_map(self.cfg.map.file)
            else:
                self.omap = generate_map(self.cfg.map.bounds_min,
                                         self.cfg.map.bounds_max,
                                         self.cfg.map.density,
                                         self.cfg.map.radius_range,
                                         self.cfg.rng_seed)

        self.positions = spawn_positions(self.cfg, self.sp)
        n = self.sp.n_agents
        self.velocities = np.zeros((n, 3))
        self.quad_mode = self.cfg.dynamics_mode == "quadcopter"
        if self.quad_mode:
            self.quad_states = np.zeros((n, 12))
            self.quad_states[:, :3] = self.positions

        self.tick_index = 0
        self.pending = sorted((copy.deepcopy(p) for p in patches),
                              key=lambda p: p.apply_tick)
        self.applied_patches: list[dict] = []
        self.rejected_patches: list[dict] = []
        self.metrics: list = []
        self._state_t: list[float] = []
        self._state_rows: list[np.ndarray] = []
        self.last_commands = np.zeros((n, 3))

        stride = self.cfg.state_stride
        self.state_stride = stride if stride else (1 if n <= 64 else 10)
        self.collect_states = True

    @property
    def t(self) -> float:
        return self.tick_index * self.cfg.dt

    def submit_patch(self, patch: ParamPatch) -> None:
        """Queue a patch for its target tick (thread-safe enough: append only)."""
        self.pending.append(patch)

    def _drain_patches(self) -> None:
        due = [p for p in self.pending if p.apply_tick <= self.tick_index]
        if not due:
            return
        self.pending = [p for p in self.pending if p.apply_tick > self.tick_index]
        for patch in sorted(due, key=lambda p: p.apply_tick):
            entry = patch.as_dict()
            entry["apply_tick"] = self.tick_index
            try:
                self.sp = apply_patch(self.sp, patch)
            except PatchError as exc:
                entry["rejected"] = str(exc)
                self.rejected_patches.append(entry)
            else:
                self.applied_patches.append(entry)

    def tick(self) -> None:
        """One synchronous update from the current snapshot."""
        self._drain_patches()
        pos = self.positions
        vel = self.velocities
        sp = self.sp
        n = sp.n_agents
        graph = build_graph(pos, sp)
        cmds = np.zeros((n, 3))
        for i in range(n):
            virtuals = virtual_agents_for(sp.algorithm, pos[i], vel[i],
                                          self.omap, sp)
            cmds[i] = command_for(sp.algorithm, i, pos, vel,
                                  graph.neighbor_lists[i], virtuals, sp)
        self.last_commands = cmds

        stride = self.cfg.metrics_stride
        if stride and self.tick_index % stride == 0:
            self.metrics.append(compute_frame(
                self.t, pos, vel, cmds, graph, self.omap, sp.r_coll))
        if self.collect_states and self.tick_index % self.state_stride == 0:
            self._state_t.append(self.t)
            self._state_rows.append(np.hstack([pos, vel]))

        if self.quad_mode:
            for i in range(n):
                state = AgentState.from_vector(self.quad_states[i])
                new = step_quadcopter(state, cmds[i], self.qp, self.cfg.dt,
                                      v_max=sp.v_max)
                self.quad_states[i] = new.as_vector()
            self.positions = self.quad_states[:, :3].copy()
            vel_out = np.empty((n, 3))
            for i in range(n):
                rot = rotation_body_to_inertial(self.quad_states[i, 6],
                                                self.quad_states[i, 7],
                                                self.quad_states[i, 8])
                vel_out[i] = rot @ self.quad_states[i, 3:6]
            self.velocities = vel_out
        else:
            self.positions, self.velocities = step_point_mass_arrays(
                pos, vel, cmds, self.cfg.dt, sp.v_max)
        self.tick_index += 1

    def close_series(self) -> None:
        """Append the final-state sample at t_end to metrics and states."""
        if self.cfg.metrics_stride:
            graph = build_graph(self.positions, self.sp)
            self.metrics.append(compute_frame(
                self.t, self.positions, self.velocities, self.last_commands,
                graph, self.omap, self.sp.r_coll))
        if self.collect_states:
            self._state_t.append(self.t)
            self._state_rows.append(np.hstack([self.positions, self.velocities]))

    def state_arrays(self) -> tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        if not self._state_rows:
            return None, None
        return (np.array(self._state_t),
                np.stack(self._state_rows))


def run(cfg: SimConfig, sp: SwarmParams, qp: Optional[QuadParams] = None,
        patches: Sequence[ParamPatch] = (), out_dir=None,
        collect_states: bool = True,
        progress: Optional[Callable[[int, int], None]] = None) -> RunRecord:
    """Execute round(t_end/dt) ticks and assemble (optionally write) a record.

    Wall time and the real-time factor cover the tick loop only; spawn,
    map generation, and persistence are excluded.  A numeric blowup in
    the dynamics aborts the run and is reported in the record instead of
    crashing.
    """
    world = World(cfg, sp, qp, patches)
    world.collect_states = collect_states
    n_ticks = world.cfg.n_ticks()
    aborted = None

    t0 = time.perf_counter()
    try:
        for k in range(n_ticks):
            world.tick()
            if progress is not None and n_ticks >= 10 and (k + 1) % (n_ticks // 10) == 0:
                progress(k + 1, n_ticks)
    except NumericBlowupError as exc:
        aborted = {"tick": world.tick_index, "reason": str(exc)}
    wall = time.perf_counter() - t0

    if aborted is None:
        world.close_series()
    state_t, states = world.state_arrays()
    rec = RunRecord(
        config=to_dict(world.cfg, world.sp, world.qp),
        patches=world.applied_patches,
        n_ticks=world.tick_index,
        wall_seconds=wall,
        real_time_factor=wall / world.cfg.t_end,
        aborted=aborted,
        metrics=world.metrics,
        state_t=state_t,
        states=states,
        omap=world.omap,
        schema_version=SCHEMA_VERSION,
    )
    if out_dir is not None:
        write_record(rec, out_dir)
    return rec
