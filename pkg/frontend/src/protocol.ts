// Message shapes for the live session socket, plus client-side patch
// validation.  The validator mirrors the server's swarm-parameter invariants
// so a bad patch is blocked in the form instead of bouncing off the server.

export type Vec3 = [number, number, number];

/** One agent row: [pn, pe, pd, vn, ve, vd] in NED metres / metres per second. */
export type AgentRow = [number, number, number, number, number, number];

export interface MetricsRow {
  t: number;
  phi_order: number;
  phi_safety_ag: number;
  phi_safety_obs: number;
  phi_union: number;
  phi_connectivity: number;
  [key: string]: number;
}

export interface MapPayload {
  obstacles: [number, number, number][]; // [center_n, center_e, radius]
  digest: string;
}

export interface SwarmDoc {
  n_agents: number;
  algorithm: string;
  neighbor_mode: string;
  radius: number;
  nn: number;
  d_ref: number;
  v_ref: number;
  u_mig: Vec3;
  r_coll: number;
  v_max: number;
  a_max: number;
  migration: boolean;
}

export interface SnapshotMessage {
  type: "snapshot";
  schema: number;
  tick: number;
  t: number;
  total_ticks: number;
  status: string;
  frame_rate: number;
  config: { sim: Record<string, unknown>; swarm: SwarmDoc; gains: Record<string, unknown> };
  map: MapPayload | null;
  agents: AgentRow[];
  metrics: MetricsRow | null;
}

export interface FrameMessage {
  type: "frame";
  schema: number;
  tick: number;
  t: number;
  status: string;
  agents: AgentRow[];
  metrics: MetricsRow | null;
}

export interface AckMessage {
  type: "ack";
  cmd: string;
  apply_tick?: number;
  status?: string;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  cmd?: string;
  reason: string;
}

export type ServerMessage = SnapshotMessage | FrameMessage | AckMessage | ErrorMessage;

/** Fields a param_patch control message may carry (besides "type"). */
export interface PatchFields {
  v_ref?: number;
  d_ref?: number;
  u_mig?: Vec3;
  gains_olfati_saber?: Record<string, number>;
  gains_vasarhelyi?: Record<string, number>;
}

export interface FieldErrors {
  [field: string]: string;
}

/**
 * Check a candidate patch against the swarm parameters it would produce.
 * Returns per-field messages; an empty object means the patch may be sent.
 *
 * The rules restate the server's SwarmParams invariants on the client so the
 * panel can refuse locally. The swarm document from the snapshot supplies the
 * fields a patch cannot change (r_coll, v_max, nn, ...); those still
 * participate, e.g. a d_ref below 2*r_coll or a topological count above N-1
 * is reported even though the stuck field is not the one being edited.
 */
export function validatePatch(swarm: SwarmDoc, patch: PatchFields): FieldErrors {
  const errors: FieldErrors = {};
  const dRef = patch.d_ref ?? swarm.d_ref;
  const vRef = patch.v_ref ?? swarm.v_ref;

  if (!(dRef > 2 * swarm.r_coll)) {
    errors.d_ref = `must exceed ${2 * swarm.r_coll} m (twice the collision radius)`;
  }
  if (!(vRef > 0)) {
    errors.v_ref = "must be positive";
  } else if (!(swarm.v_max >= vRef)) {
    errors.v_ref = `must not exceed v_max = ${swarm.v_max} m/s`;
  }
  if (patch.u_mig !== undefined) {
    if (patch.u_mig.length !== 3 || patch.u_mig.some((c) => !Number.isFinite(c))) {
      errors.u_mig = "must be three finite components";
    }
  }
  if (
    swarm.neighbor_mode === "topological" &&
    swarm.n_agents > 1 &&
    !(swarm.nn >= 1 && swarm.nn <= swarm.n_agents - 1)
  ) {
    errors.nn = `topological count must be between 1 and ${swarm.n_agents - 1}`;
  }
  for (const block of ["gains_olfati_saber", "gains_vasarhelyi"] as const) {
    const gains = patch[block];
    if (!gains) continue;
    for (const [k, v] of Object.entries(gains)) {
      if (!Number.isFinite(v)) errors[`${block}.${k}`] = "must be a finite number";
    }
  }
  return errors;
}

/** Heading of a velocity in the horizontal plane, radians from north, east positive. */
export function headingOf(vn: number, ve: number): number {
  return Math.atan2(ve, vn);
}

/** Heading of the mean horizontal velocity over all agents, or null when still. */
export function meanHeading(agents: AgentRow[]): number | null {
  let n = 0;
  let e = 0;
  for (const a of agents) {
    n += a[3];
    e += a[4];
  }
  const mag = Math.hypot(n, e);
  if (mag < 1e-9) return null;
  return headingOf(n / agents.length, e / agents.length);
}

/** Smallest absolute difference between two angles, radians. */
export function angleBetween(a: number, b: number): number {
  let d = (a - b) % (2 * Math.PI);
  if (d > Math.PI) d -= 2 * Math.PI;
  if (d < -Math.PI) d += 2 * Math.PI;
  return Math.abs(d);
}
