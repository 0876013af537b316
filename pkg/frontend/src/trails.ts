import { AgentRow } from "./protocol";

/**
 * Per-agent position history with a hard cap, kept as parallel ring buffers
 * so a long session allocates nothing after warm-up.
 */
export class TrailStore {
  private n = 0;
  private cap: number;
  private north: Float64Array[] = [];
  private east: Float64Array[] = [];
  private head = 0;
  private count = 0;

  constructor(maxPoints = 300) {
    this.cap = maxPoints;
  }

  get length(): number {
    return this.count;
  }

  get agents(): number {
    return this.n;
  }

  /** Append the current positions; a changed agent count resets the store. */
  push(agents: AgentRow[]): void {
    if (agents.length !== this.n) {
      this.n = agents.length;
      this.north = agents.map(() => new Float64Array(this.cap));
      this.east = agents.map(() => new Float64Array(this.cap));
      this.head = 0;
      this.count = 0;
    }
    for (let i = 0; i < this.n; i++) {
      this.north[i][this.head] = agents[i][0];
      this.east[i][this.head] = agents[i][1];
    }
    this.head = (this.head + 1) % this.cap;
    if (this.count < this.cap) this.count += 1;
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }

  /** Trail of agent i, oldest first, as [n, e] pairs. */
  trail(i: number): [number, number][] {
    const out: [number, number][] = [];
    const start = (this.head - this.count + this.cap) % this.cap;
    for (let k = 0; k < this.count; k++) {
      const j = (start + k) % this.cap;
      out.push([this.north[i][j], this.east[i][j]]);
    }
    return out;
  }

  /** Total stored points, the soak test's memory proxy. */
  pointCount(): number {
    return this.n * this.count;
  }
}
