import { AgentRow, MapPayload } from "./protocol";
import { TrailStore } from "./trails";

// Top-down world view in NED: north points up the screen, east points right,
// altitude is ignored. The viewport fits the obstacle field and the swarm
// with a margin and only ever zooms out, so the frame does not jitter.

export interface Camera {
  centerN: number;
  centerE: number;
  metersPerPixel: number;
}

export function fitCamera(
  agents: AgentRow[],
  map: MapPayload | null,
  wPx: number,
  hPx: number,
  prev: Camera | null,
): Camera {
  let minN = Infinity;
  let maxN = -Infinity;
  let minE = Infinity;
  let maxE = -Infinity;
  for (const a of agents) {
    minN = Math.min(minN, a[0]);
    maxN = Math.max(maxN, a[0]);
    minE = Math.min(minE, a[1]);
    maxE = Math.max(maxE, a[1]);
  }
  if (map) {
    for (const [cn, ce, r] of map.obstacles) {
      minN = Math.min(minN, cn - r);
      maxN = Math.max(maxN, cn + r);
      minE = Math.min(minE, ce - r);
      maxE = Math.max(maxE, ce + r);
    }
  }
  if (!Number.isFinite(minN)) {
    return prev ?? { centerN: 0, centerE: 0, metersPerPixel: 1 };
  }
  const margin = 30;
  const spanN = maxN - minN + 2 * margin;
  const spanE = maxE - minE + 2 * margin;
  const mpp = Math.max(spanN / hPx, spanE / wPx);
  const cam: Camera = {
    centerN: (minN + maxN) / 2,
    centerE: (minE + maxE) / 2,
    metersPerPixel: prev ? Math.max(mpp, prev.metersPerPixel) : mpp,
  };
  return cam;
}

function toScreen(cam: Camera, wPx: number, hPx: number, n: number, e: number): [number, number] {
  return [
    wPx / 2 + (e - cam.centerE) / cam.metersPerPixel,
    hPx / 2 - (n - cam.centerN) / cam.metersPerPixel,
  ];
}

export interface ViewState {
  agents: AgentRow[];
  map: MapPayload | null;
  trails: TrailStore;
  paused: boolean;
  status: string;
  tick: number;
  t: number;
}

export function drawScene(ctx: CanvasRenderingContext2D, view: ViewState, cam: Camera): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, w, h);

  if (view.map) {
    ctx.fillStyle = "#3a3f4a";
    for (const [cn, ce, r] of view.map.obstacles) {
      const [x, y] = toScreen(cam, w, h, cn, ce);
      ctx.beginPath();
      ctx.arc(x, y, Math.max(1.5, r / cam.metersPerPixel), 0, 2 * Math.PI);
      ctx.fill();
    }
  }

  ctx.strokeStyle = "rgba(110, 168, 254, 0.35)";
  ctx.lineWidth = 1;
  for (let i = 0; i < view.trails.agents; i++) {
    const pts = view.trails.trail(i);
    if (pts.length < 2) continue;
    ctx.beginPath();
    for (let k = 0; k < pts.length; k++) {
      const [x, y] = toScreen(cam, w, h, pts[k][0], pts[k][1]);
      if (k === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    }
    ctx.stroke();
  }

  for (const a of view.agents) {
    const [x, y] = toScreen(cam, w, h, a[0], a[1]);
    ctx.fillStyle = "#6ea8fe";
    ctx.beginPath();
    ctx.arc(x, y, 3, 0, 2 * Math.PI);
    ctx.fill();
    // short tick along the velocity so the motion direction reads at a glance
    const speed = Math.hypot(a[3], a[4]);
    if (speed > 0.05) {
      ctx.strokeStyle = "#d8e3ff";
      ctx.beginPath();
      ctx.moveTo(x, y);
      ctx.lineTo(x + (a[4] / speed) * 9, y - (a[3] / speed) * 9);
      ctx.stroke();
    }
  }

  ctx.fillStyle = "#9aa4b2";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(`t = ${view.t.toFixed(2)} s   tick ${view.tick}`, 10, h - 12);
  if (view.paused) {
    ctx.fillStyle = "#ffd166";
    ctx.font = "bold 14px system-ui, sans-serif";
    ctx.fillText("PAUSED", 10, 20);
  } else if (view.status === "finished" || view.status === "aborted") {
    ctx.fillStyle = view.status === "finished" ? "#8ce99a" : "#ff6b6b";
    ctx.font = "bold 14px system-ui, sans-serif";
    ctx.fillText(view.status.toUpperCase(), 10, 20);
  }
}
