// Integration against a real simulator session: `swarmsim serve` is spawned
// as a child process and the client code under test talks to it over an
// actual websocket. Skipped automatically when the CLI is not installed.

import { ChildProcess, execSync, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";
import { angleBetween, meanHeading } from "../src/protocol";
import { SessionClient } from "../src/session";
import { Series } from "../src/sparkline";
import { TrailStore } from "../src/trails";

function haveCli(): boolean {
  try {
    execSync("swarmsim --version", { stdio: "ignore" });
    return true;
  } catch {
    return false;
  }
}

function serve(port: number, args: string[]): ChildProcess {
  return spawn(
    "swarmsim",
    ["serve", "--host", "127.0.0.1", "--port", String(port), ...args],
    { stdio: "ignore" },
  );
}

async function connect(port: number): Promise<WebSocket> {
  // the server needs a moment to bind; retry instead of sleeping blind
  for (let attempt = 0; attempt < 50; attempt++) {
    try {
      const ws = new WebSocket(`ws://127.0.0.1:${port}/ws`);
      await new Promise<void>((resolve, reject) => {
        ws.once("open", resolve);
        ws.once("error", reject);
      });
      return ws;
    } catch {
      await new Promise((r) => setTimeout(r, 200));
    }
  }
  throw new Error("live server did not come up");
}

function attach(ws: WebSocket): SessionClient {
  const session = new SessionClient({
    send: (d) => ws.send(d),
    get readyState() {
      return ws.readyState;
    },
  });
  ws.on("message", (data) => session.feed(data.toString()));
  return session;
}

function waitFor(
  pred: () => boolean,
  timeoutMs: number,
  label: string,
): Promise<void> {
  return new Promise((resolve, reject) => {
    const t0 = Date.now();
    const poll = setInterval(() => {
      if (pred()) {
        clearInterval(poll);
        resolve();
      } else if (Date.now() - t0 > timeoutMs) {
        clearInterval(poll);
        reject(new Error(`timed out waiting for ${label}`));
      }
    }, 10);
  });
}

describe.skipIf(!haveCli())("live server integration", () => {
  describe("migration heading patch", () => {
    let proc: ChildProcess;
    let ws: WebSocket;

    beforeAll(async () => {
      proc = serve(8791, ["--config", "free", "--agents", "6", "--nn", "5",
                          "--t-end", "60", "--seed", "11", "--rate", "50"]);
      ws = await connect(8791);
    });

    afterAll(() => {
      ws?.close();
      proc?.kill();
    });

    it("turns the swarm east within 10 simulated seconds", async () => {
      const session = attach(ws);
      await waitFor(() => session.snapshot !== null, 10_000, "snapshot");
      const dt = session.snapshot!.config.sim.dt as number;

      // let the swarm pick up speed along the original (north) heading first
      session.setRate(500);
      await waitFor(
        () => {
          const f = session.takeFrame();
          if (!f || f.t < 2) return false;
          const h = meanHeading(f.agents);
          return h !== null && angleBetween(h, 0) < 0.1;
        },
        30_000,
        "northbound cruise",
      );

      const target = Math.PI / 2; // rotate the commanded heading 90 degrees
      const errors = session.sendPatch({ u_mig: [0, 6, 0] });
      expect(errors).toEqual({});
      await waitFor(() => session.lastApplyTick !== null, 10_000, "patch ack");
      const tApply = session.lastApplyTick! * dt;

      let tTurned: number | null = null;
      await waitFor(
        () => {
          const f = session.takeFrame();
          if (!f) return false;
          const h = meanHeading(f.agents);
          if (h !== null && angleBetween(h, target) < 0.1) {
            tTurned = f.t;
            return true;
          }
          // far past the window with no turn: stop and let the asserts fail
          return f.t > tApply + 15;
        },
        60_000,
        "eastbound heading",
      );

      expect(tTurned).not.toBeNull();
      expect(tTurned! - tApply).toBeLessThanOrEqual(10);
    }, 90_000);
  });

  describe("100 s soak", () => {
    let proc: ChildProcess;
    let ws: WebSocket;

    beforeAll(async () => {
      proc = serve(8792, ["--config", "crossing", "--t-end", "100",
                          "--rate", "100"]);
      ws = await connect(8792);
    });

    afterAll(() => {
      ws?.close();
      proc?.kill();
    });

    it("keeps trails, series and mailbox bounded to the end", async () => {
      const session = attach(ws);
      const trails = new TrailStore(200);
      const order = new Series(200);
      const conn = new Series(200);

      await waitFor(() => session.snapshot !== null, 10_000, "snapshot");
      // 3x real time: below the single-core tick capacity, so frames stream
      // densely instead of being coalesced away by catch-up bursts
      session.setRate(300);

      let frames = 0;
      while (!session.finished) {
        const f = session.takeFrame();
        if (f) {
          frames += 1;
          trails.push(f.agents);
          if (f.metrics) {
            order.push(f.metrics.phi_order);
            conn.push(f.metrics.phi_connectivity);
          }
        } else {
          await new Promise((r) => setTimeout(r, 5));
        }
      }

      // the session ran to its end: 100 s of simulated time at dt = 0.01
      expect(session.lastTick).toBe(10_000);
      expect(frames).toBeGreaterThan(200);
      // far more frames went past than the stores retain: the caps bind
      expect(trails.length).toBe(200);
      expect(trails.pointCount()).toBe(25 * 200);
      expect(order.length).toBe(200);
      expect(conn.length).toBe(200);
      // the mailbox never queues: after one take the slot is empty
      session.takeFrame();
      expect(session.takeFrame()).toBeNull();
    }, 240_000);
  });
});
